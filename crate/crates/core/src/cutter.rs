// Copyright 2026 The fragshadow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Wire cutting: circuit + cut locations → fragment multigraph, and the
//! observable-driven partition of that graph into κ (fragments the observable
//! touches), Γ (their strict ancestors) and Δ (everything else).
//!
//! A cut severs a wire between two gates. Each wire is thereby split into
//! segments; fragments are the connected components of segments joined by
//! gates. A fragment's local register holds one qubit per segment, ordered
//! with quantum outputs first and circuit outputs after, which is also the
//! order of the output part of its Choi register.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Cut of `wire` between gate `after_gate` and the next gate touching it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CutSpec {
    pub wire: usize,
    pub after_gate: usize,
}

impl CutSpec {
    pub fn new(wire: usize, after_gate: usize) -> Self {
        CutSpec { wire, after_gate }
    }
}

/// `{"cuts":[{"wire":w,"after_gate":g}]}`
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CutFile {
    pub cuts: Vec<CutSpec>,
}

/// Segment `segment` (0-based, counted along the wire) of original wire `wire`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct WireSegment {
    pub wire: usize,
    pub segment: usize,
}

/// One entry of a fragment's q_in / q_out / c_out table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Slot {
    /// Original circuit wire.
    pub wire: usize,
    /// Index into the fragment's local register.
    pub local: usize,
    /// Graph edge attached to this slot; `None` for circuit outputs.
    pub edge: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fragment {
    pub id: usize,
    /// Gates relabelled onto the local register.
    pub subcircuit: Circuit,
    /// Original segment behind each local qubit.
    pub local_wires: Vec<WireSegment>,
    pub q_in: Vec<Slot>,
    pub q_out: Vec<Slot>,
    pub c_out: Vec<Slot>,
    /// Ordinals of this fragment's gates in the uncut circuit.
    pub gate_ordinals: Vec<usize>,
}

impl Fragment {
    /// Builds a fragment directly from a channel description.
    ///
    /// `q_in` lists local qubits fed by quantum inputs (the rest start in |0⟩);
    /// `q_out` and `c_out` must partition the local register. Local qubits are
    /// renumbered into the canonical `[q_out | c_out]` order. Slots carry no edges
    /// and original wire labels equal the caller's local indices.
    pub fn from_channel(
        id: usize,
        subcircuit: &Circuit,
        q_in: &[usize],
        q_out: &[usize],
        c_out: &[usize],
    ) -> Result<Fragment> {
        let n = subcircuit.n_qubits();
        let mut seen = vec![false; n];
        for &q in q_out.iter().chain(c_out) {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::InvalidArgument(format!("local qubit {q} listed twice among outputs")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("outputs must cover every local qubit".into()));
        }
        let mut in_seen = BTreeSet::new();
        for &q in q_in {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
            }
            if !in_seen.insert(q) {
                return Err(Error::InvalidArgument(format!("local qubit {q} listed twice among inputs")));
            }
        }
        let order: Vec<usize> = q_out.iter().chain(c_out).copied().collect();
        let mut new_index = vec![0; n];
        for (pos, &q) in order.iter().enumerate() {
            new_index[q] = pos;
        }
        let mut sub = Circuit::new(n);
        for g in subcircuit.gates() {
            sub.push(g.relabelled(|q| new_index[q]))?;
        }
        let slot = |q: usize| Slot { wire: q, local: new_index[q], edge: None };
        Ok(Fragment {
            id,
            subcircuit: sub,
            local_wires: order.iter().map(|&q| WireSegment { wire: q, segment: 0 }).collect(),
            q_in: q_in.iter().map(|&q| slot(q)).collect(),
            q_out: q_out.iter().map(|&q| slot(q)).collect(),
            c_out: c_out.iter().map(|&q| slot(q)).collect(),
            gate_ordinals: (0..subcircuit.gates().len()).collect(),
        })
    }

    pub fn n_local(&self) -> usize {
        self.local_wires.len()
    }

    /// Q_i + Q_o + C_o.
    pub fn deg(&self) -> usize {
        self.q_in.len() + self.q_out.len() + self.c_out.len()
    }

    /// Q_i + Q_o.
    pub fn qdeg(&self) -> usize {
        self.q_in.len() + self.q_out.len()
    }

    /// Width of the Choi register: one ancilla per quantum input plus every local qubit.
    pub fn choi_width(&self) -> usize {
        self.q_in.len() + self.n_local()
    }

    /// c_out slot holding original wire `wire`, if any.
    pub fn c_out_slot(&self, wire: usize) -> Option<usize> {
        self.c_out.iter().position(|s| s.wire == wire)
    }
}

/// Directed edge for one cut: `q_out[from_slot]` of `from` feeds `q_in[to_slot]` of `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub from_slot: usize,
    pub to: usize,
    pub to_slot: usize,
    pub wire: usize,
}

/// Fragments and the cut edges joining them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragmentGraph {
    pub n_qubits: usize,
    pub fragments: Vec<Fragment>,
    pub edges: Vec<Edge>,
}

impl FragmentGraph {
    /// Fragment owning the circuit output of `wire`.
    pub fn c_out_owner(&self, wire: usize) -> Option<usize> {
        self.fragments.iter().position(|f| f.c_out_slot(wire).is_some())
    }

    /// Whether the directed multigraph has no cycles. Cyclic graphs are legal
    /// (e.g. cuts on both sides of a gate borrowed from a neighbouring fragment).
    pub fn is_acyclic(&self) -> bool {
        let n = self.fragments.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.to] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&f| indeg[f] == 0).collect();
        let mut visited = 0;
        while let Some(f) = queue.pop_front() {
            visited += 1;
            for e in self.edges.iter().filter(|e| e.from == f) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    queue.push_back(e.to);
                }
            }
        }
        visited == n
    }

    /// Strict ancestors of `targets` (fragments with a directed path into the set), excluding the set itself.
    pub fn strict_ancestors(&self, targets: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = targets.clone();
        let mut queue: VecDeque<usize> = targets.iter().copied().collect();
        while let Some(f) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.to == f) {
                if seen.insert(e.from) {
                    queue.push_back(e.from);
                }
            }
        }
        seen.difference(targets).copied().collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn validate_cuts(circuit: &Circuit, cuts: &[CutSpec]) -> Result<()> {
    let gates = circuit.gates();
    let mut seen = BTreeSet::new();
    for c in cuts {
        if c.wire >= circuit.n_qubits() {
            return Err(Error::InvalidCut(format!("wire {} outside {}-qubit circuit", c.wire, circuit.n_qubits())));
        }
        if c.after_gate >= gates.len() {
            return Err(Error::InvalidCut(format!("gate ordinal {} outside circuit", c.after_gate)));
        }
        if !seen.insert(*c) {
            return Err(Error::InvalidCut(format!("duplicate cut on wire {} after gate {}", c.wire, c.after_gate)));
        }
        let touches = |g: &crate::circuit::Gate| g.qubits().contains(&c.wire);
        let before = gates[..=c.after_gate].iter().any(touches);
        let after = gates[c.after_gate + 1..].iter().any(touches);
        if !before || !after {
            return Err(Error::InvalidCut(format!(
                "cut on wire {} after gate {} does not separate two gates on that wire",
                c.wire, c.after_gate
            )));
        }
    }
    Ok(())
}

/// Cuts `circuit` at `cuts` and returns the fragment multigraph.
///
/// Fragments are numbered in circuit order: a fragment with gates sits at its
/// smallest gate ordinal, a gate-less segment between two cuts sits just after
/// the gate its first cut follows, and idle wires come first. Edges are listed
/// in `(after_gate, wire)` order of their cuts.
pub fn cut_circuit(circuit: &Circuit, cuts: &[CutSpec]) -> Result<FragmentGraph> {
    validate_cuts(circuit, cuts)?;
    let n = circuit.n_qubits();
    let mut per_wire: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in cuts {
        per_wire[c.wire].push(c.after_gate);
    }
    per_wire.iter_mut().for_each(|v| v.sort_unstable());

    let mut offset = Vec::with_capacity(n + 1);
    offset.push(0);
    for w in 0..n {
        offset.push(offset[w] + per_wire[w].len() + 1);
    }
    let n_segments = offset[n];
    let seg_of = |wire: usize, gate: usize| offset[wire] + per_wire[wire].partition_point(|&a| a < gate);
    let segment_id = |gid: usize| {
        let wire = offset.partition_point(|&o| o <= gid) - 1;
        WireSegment { wire, segment: gid - offset[wire] }
    };

    let mut uf = UnionFind((0..n_segments).collect());
    for (g, gate) in circuit.gates().iter().enumerate() {
        let qs = gate.qubits();
        let first = seg_of(qs[0], g);
        for &q in &qs[1..] {
            uf.union(first, seg_of(q, g));
        }
    }

    // component root → (min gate ordinal or usize::MAX, first segment)
    let mut first_gate = vec![usize::MAX; n_segments];
    for (g, gate) in circuit.gates().iter().enumerate() {
        let r = uf.find(seg_of(gate.qubits()[0], g));
        first_gate[r] = first_gate[r].min(g);
    }
    let position = |r: usize| match first_gate[r] {
        usize::MAX => {
            let WireSegment { wire, segment } = segment_id(r);
            segment.checked_sub(1).map_or(0, |j| 2 * per_wire[wire][j] + 3)
        }
        g => 2 * g + 2,
    };
    let mut roots: Vec<usize> = (0..n_segments).filter(|&s| uf.find(s) == s).collect();
    roots.sort_by_key(|&r| (position(r), r));
    let mut frag_of_root = vec![usize::MAX; n_segments];
    for (i, &r) in roots.iter().enumerate() {
        frag_of_root[r] = i;
    }
    let frag_of_seg: Vec<usize> = (0..n_segments).map(|s| frag_of_root[uf.find(s)]).collect();

    let mut sorted_cuts: Vec<CutSpec> = cuts.to_vec();
    sorted_cuts.sort_by_key(|c| (c.after_gate, c.wire));
    for c in &sorted_cuts {
        let j = per_wire[c.wire].partition_point(|&a| a < c.after_gate);
        let (a, b) = (offset[c.wire] + j, offset[c.wire] + j + 1);
        if frag_of_seg[a] == frag_of_seg[b] {
            return Err(Error::InvalidCut(format!(
                "cut on wire {} after gate {} joins fragment {} to itself",
                c.wire, c.after_gate, frag_of_seg[a]
            )));
        }
    }

    let is_last = |gid: usize| {
        let ws = segment_id(gid);
        ws.segment == per_wire[ws.wire].len()
    };
    let mut fragments = Vec::with_capacity(roots.len());
    for (fid, _) in roots.iter().enumerate() {
        let segs: Vec<usize> = (0..n_segments).filter(|&s| frag_of_seg[s] == fid).collect();
        // segment ids are wire-major, so this is already (wire, segment) order
        let out_q: Vec<usize> = segs.iter().copied().filter(|&s| !is_last(s)).collect();
        let out_c: Vec<usize> = segs.iter().copied().filter(|&s| is_last(s)).collect();
        let local_order: Vec<usize> = out_q.iter().chain(&out_c).copied().collect();
        let local_of = |s: usize| local_order.iter().position(|&x| x == s).expect("segment in fragment");
        let slot = |s: usize| Slot { wire: segment_id(s).wire, local: local_of(s), edge: None };
        let q_in: Vec<Slot> = segs.iter().filter(|&&s| segment_id(s).segment > 0).map(|&s| slot(s)).collect();
        let mut sub = Circuit::new(local_order.len());
        let mut ordinals = Vec::new();
        for (g, gate) in circuit.gates().iter().enumerate() {
            if frag_of_seg[seg_of(gate.qubits()[0], g)] != fid {
                continue;
            }
            sub.push(gate.relabelled(|q| local_of(seg_of(q, g))))?;
            ordinals.push(g);
        }
        fragments.push(Fragment {
            id: fid,
            subcircuit: sub,
            local_wires: local_order.iter().map(|&s| segment_id(s)).collect(),
            q_in,
            q_out: out_q.iter().map(|&s| slot(s)).collect(),
            c_out: out_c.iter().map(|&s| slot(s)).collect(),
            gate_ordinals: ordinals,
        });
    }

    let mut edges = Vec::with_capacity(sorted_cuts.len());
    for (eid, c) in sorted_cuts.iter().enumerate() {
        let j = per_wire[c.wire].partition_point(|&a| a < c.after_gate);
        let (a, b) = (offset[c.wire] + j, offset[c.wire] + j + 1);
        let (from, to) = (frag_of_seg[a], frag_of_seg[b]);
        let from_slot = fragments[from]
            .q_out
            .iter()
            .position(|s| fragments[from].local_wires[s.local] == segment_id(a))
            .expect("q_out slot for cut");
        let to_slot = fragments[to]
            .q_in
            .iter()
            .position(|s| fragments[to].local_wires[s.local] == segment_id(b))
            .expect("q_in slot for cut");
        fragments[from].q_out[from_slot].edge = Some(eid);
        fragments[to].q_in[to_slot].edge = Some(eid);
        edges.push(Edge { from, from_slot, to, to_slot, wire: c.wire });
    }

    Ok(FragmentGraph { n_qubits: n, fragments, edges })
}

/// κ / Γ / Δ split of fragments and the matching split of edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub kappa: BTreeSet<usize>,
    pub gamma: BTreeSet<usize>,
    pub delta: BTreeSet<usize>,
    /// Edges with both ends outside Δ.
    pub e_not_delta: BTreeSet<usize>,
    /// Edges leaving κ ∪ Γ into Δ.
    pub e_not_delta_to_delta: BTreeSet<usize>,
    /// Edges inside Δ.
    pub e_delta: BTreeSet<usize>,
}

impl Partition {
    pub fn survivors(&self) -> BTreeSet<usize> {
        self.kappa.union(&self.gamma).copied().collect()
    }
}

/// Splits the graph for an observable supported on `support` (0-based circuit wires).
pub fn partition_for_observable(graph: &FragmentGraph, support: &BTreeSet<usize>) -> Result<Partition> {
    let mut kappa = BTreeSet::new();
    for &q in support {
        let owner = graph
            .c_out_owner(q)
            .ok_or_else(|| Error::Partition(format!("qubit {} is not a circuit output of any fragment", q + 1)))?;
        kappa.insert(owner);
    }
    let gamma = graph.strict_ancestors(&kappa);
    let delta: BTreeSet<usize> =
        (0..graph.fragments.len()).filter(|f| !kappa.contains(f) && !gamma.contains(f)).collect();
    let mut p = Partition {
        kappa,
        gamma,
        delta,
        e_not_delta: BTreeSet::new(),
        e_not_delta_to_delta: BTreeSet::new(),
        e_delta: BTreeSet::new(),
    };
    for (i, e) in graph.edges.iter().enumerate() {
        match (p.delta.contains(&e.from), p.delta.contains(&e.to)) {
            (false, false) => p.e_not_delta.insert(i),
            (false, true) => p.e_not_delta_to_delta.insert(i),
            (true, true) => p.e_delta.insert(i),
            (true, false) => {
                return Err(Error::Partition(format!(
                    "edge {i} runs from Δ fragment {} into fragment {}",
                    e.from, e.to
                )))
            }
        };
    }
    Ok(p)
}

/// A quantum output of a surviving fragment that feeds Δ; its operator is fixed to identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityAssignment {
    pub fragment: usize,
    pub q_out_slot: usize,
    pub edge: usize,
}

/// Graph restricted to κ ∪ Γ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedGraph {
    pub n_qubits: usize,
    /// Surviving fragments, keeping their original ids.
    pub fragments: Vec<Fragment>,
    pub kappa: BTreeSet<usize>,
    pub gamma: BTreeSet<usize>,
    /// Edges of E_¬Δ, as `(original edge index, edge)`; the M-sum runs over these.
    pub free_edges: Vec<(usize, Edge)>,
    pub identity_outputs: Vec<IdentityAssignment>,
}

impl ReducedGraph {
    pub fn fragment(&self, id: usize) -> Option<&Fragment> {
        self.fragments.iter().find(|f| f.id == id)
    }

    /// Position of an original edge index among the free edges.
    pub fn free_position(&self, edge: usize) -> Option<usize> {
        self.free_edges.iter().position(|&(e, _)| e == edge)
    }

    pub fn n_free_edges(&self) -> usize {
        self.free_edges.len()
    }
}

/// Drops Δ and E_Δ; each edge of E_¬Δ→Δ becomes an identity assignment on its source slot.
pub fn reduce(graph: &FragmentGraph, partition: &Partition) -> ReducedGraph {
    ReducedGraph {
        n_qubits: graph.n_qubits,
        fragments: graph.fragments.iter().filter(|f| !partition.delta.contains(&f.id)).cloned().collect(),
        kappa: partition.kappa.clone(),
        gamma: partition.gamma.clone(),
        free_edges: partition.e_not_delta.iter().map(|&e| (e, graph.edges[e])).collect(),
        identity_outputs: partition
            .e_not_delta_to_delta
            .iter()
            .map(|&e| IdentityAssignment {
                fragment: graph.edges[e].from,
                q_out_slot: graph.edges[e].from_slot,
                edge: e,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    /// U on (0,1) then V on (1,2).
    fn two_gate_circuit() -> Circuit {
        Circuit::new(3).with(Gate::haar(&[0, 1], 1).unwrap()).unwrap().with(Gate::haar(&[1, 2], 2).unwrap()).unwrap()
    }

    #[test]
    fn two_fragment_cut() {
        let g = cut_circuit(&two_gate_circuit(), &[CutSpec::new(1, 0)]).unwrap();
        assert_eq!(g.fragments.len(), 2);
        assert_eq!(g.edges.len(), 1);
        let (f1, f2) = (&g.fragments[0], &g.fragments[1]);
        assert_eq!(f1.gate_ordinals, vec![0]);
        assert_eq!(f1.c_out.iter().map(|s| s.wire).collect::<Vec<_>>(), vec![0]);
        assert_eq!(f1.q_out.iter().map(|s| s.wire).collect::<Vec<_>>(), vec![1]);
        assert!(f1.q_in.is_empty());
        assert_eq!(f2.gate_ordinals, vec![1]);
        assert_eq!(f2.q_in.iter().map(|s| s.wire).collect::<Vec<_>>(), vec![1]);
        assert_eq!(f2.c_out.iter().map(|s| s.wire).collect::<Vec<_>>(), vec![1, 2]);
        assert!(f2.q_out.is_empty());
        assert_eq!(g.edges[0], Edge { from: 0, from_slot: 0, to: 1, to_slot: 0, wire: 1 });
        assert_eq!((f1.deg(), f1.qdeg()), (2, 1));
        assert_eq!((f2.deg(), f2.qdeg()), (3, 1));
        assert!(g.is_acyclic());
    }

    #[test]
    fn no_cuts_single_fragment() {
        let g = cut_circuit(&two_gate_circuit(), &[]).unwrap();
        assert_eq!(g.fragments.len(), 1);
        assert!(g.edges.is_empty());
        assert_eq!(g.fragments[0].c_out.len(), 3);
    }

    #[test]
    fn invalid_cuts() {
        let c = two_gate_circuit();
        // wire 0 has no gate after gate 0
        assert!(matches!(cut_circuit(&c, &[CutSpec::new(0, 0)]), Err(Error::InvalidCut(_))));
        assert!(matches!(cut_circuit(&c, &[CutSpec::new(1, 0), CutSpec::new(1, 0)]), Err(Error::InvalidCut(_))));
        assert!(matches!(cut_circuit(&c, &[CutSpec::new(5, 0)]), Err(Error::InvalidCut(_))));
        assert!(matches!(cut_circuit(&c, &[CutSpec::new(1, 7)]), Err(Error::InvalidCut(_))));
    }

    #[test]
    fn self_loop_rejected() {
        // gates 0 and 1 share wires 0 and 1; cutting only wire 1 keeps them connected via wire 0
        let c = Circuit::new(2)
            .with(Gate::named("cnot", &[0, 1]).unwrap())
            .unwrap()
            .with(Gate::named("cnot", &[0, 1]).unwrap())
            .unwrap();
        assert!(matches!(cut_circuit(&c, &[CutSpec::new(1, 0)]), Err(Error::InvalidCut(_))));
    }

    #[test]
    fn empty_segment_is_identity_fragment() {
        // wire 0: H (g0), then idle through g1, then H (g2); cutting after g0 and g1 leaves a gate-less segment
        let c = Circuit::new(2)
            .with(Gate::named("h", &[0]).unwrap())
            .unwrap()
            .with(Gate::named("h", &[1]).unwrap())
            .unwrap()
            .with(Gate::named("h", &[0]).unwrap())
            .unwrap();
        let g = cut_circuit(&c, &[CutSpec::new(0, 0), CutSpec::new(0, 1)]).unwrap();
        assert_eq!(g.fragments.len(), 4);
        let order: Vec<Vec<usize>> = g.fragments.iter().map(|f| f.gate_ordinals.clone()).collect();
        assert_eq!(order, vec![vec![0], vec![], vec![1], vec![2]]);
        let ident = &g.fragments[1];
        assert!(ident.gate_ordinals.is_empty());
        assert_eq!((ident.q_in.len(), ident.q_out.len(), ident.c_out.len()), (1, 1, 0));
    }

    #[test]
    fn multiple_cuts_on_one_wire_thread_three_fragments() {
        let c = Circuit::new(1)
            .with(Gate::named("h", &[0]).unwrap())
            .unwrap()
            .with(Gate::named("s", &[0]).unwrap())
            .unwrap()
            .with(Gate::named("h", &[0]).unwrap())
            .unwrap();
        let g = cut_circuit(&c, &[CutSpec::new(0, 1), CutSpec::new(0, 0)]).unwrap();
        assert_eq!(g.fragments.len(), 3);
        assert_eq!(g.edges.len(), 2);
        assert_eq!((g.edges[0].from, g.edges[0].to), (0, 1));
        assert_eq!((g.edges[1].from, g.edges[1].to), (1, 2));
        let mid = &g.fragments[1];
        assert_eq!(mid.local_wires.len(), 1);
        assert_eq!((mid.q_in.len(), mid.q_out.len()), (1, 1));
    }

    #[test]
    fn every_gate_assigned_once_in_order() {
        let mut c = Circuit::new(4);
        for (i, qs) in [[0, 1], [2, 3], [1, 2], [0, 1], [2, 3]].iter().enumerate() {
            c.push(Gate::haar(qs, i as u64).unwrap()).unwrap();
        }
        let g = cut_circuit(&c, &[CutSpec::new(2, 1), CutSpec::new(2, 2)]).unwrap();
        assert_eq!(g.fragments.len(), 2);
        let mut all: Vec<usize> = g.fragments.iter().flat_map(|f| f.gate_ordinals.clone()).collect();
        for f in &g.fragments {
            assert!(f.gate_ordinals.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(f.subcircuit.gates().len(), f.gate_ordinals.len());
        }
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        for e in &g.edges {
            assert_eq!(g.fragments[e.from].q_out[e.from_slot].edge, Some(g.edges.iter().position(|x| x == e).unwrap()));
            assert_eq!(g.fragments[e.to].q_in[e.to_slot].wire, e.wire);
        }
    }

    /// f0 → f1 → f2 chain on one wire plus an extra output on f0.
    fn chain() -> FragmentGraph {
        let c = Circuit::new(2)
            .with(Gate::named("cnot", &[0, 1]).unwrap())
            .unwrap()
            .with(Gate::named("h", &[1]).unwrap())
            .unwrap()
            .with(Gate::named("s", &[1]).unwrap())
            .unwrap();
        cut_circuit(&c, &[CutSpec::new(1, 0), CutSpec::new(1, 1)]).unwrap()
    }

    #[test]
    fn partition_chain_observable_upstream_only() {
        let g = chain();
        let p = partition_for_observable(&g, &BTreeSet::from([0])).unwrap();
        assert_eq!(p.kappa, BTreeSet::from([0]));
        assert!(p.gamma.is_empty());
        assert_eq!(p.delta, BTreeSet::from([1, 2]));
        assert_eq!(p.e_not_delta_to_delta, BTreeSet::from([0]));
        assert_eq!(p.e_delta, BTreeSet::from([1]));
        let r = reduce(&g, &p);
        assert_eq!(r.fragments.len(), 1);
        assert_eq!(r.n_free_edges(), 0);
        assert_eq!(r.identity_outputs, vec![IdentityAssignment { fragment: 0, q_out_slot: 0, edge: 0 }]);
    }

    #[test]
    fn partition_downstream_observable_pulls_ancestors() {
        let g = chain();
        let p = partition_for_observable(&g, &BTreeSet::from([1])).unwrap();
        assert_eq!(p.kappa, BTreeSet::from([2]));
        assert_eq!(p.gamma, BTreeSet::from([0, 1]));
        assert!(p.delta.is_empty());
        let r = reduce(&g, &p);
        assert_eq!(r.fragments.len(), 3);
        assert_eq!(r.n_free_edges(), 2);
        assert!(r.identity_outputs.is_empty());
    }

    #[test]
    fn partition_trivial_and_full_support() {
        let g = chain();
        let p = partition_for_observable(&g, &BTreeSet::new()).unwrap();
        assert!(p.kappa.is_empty() && p.gamma.is_empty());
        assert_eq!(p.delta.len(), 3);
        let p = partition_for_observable(&g, &BTreeSet::from([0, 1])).unwrap();
        assert_eq!(p.kappa, BTreeSet::from([0, 2]));
        assert_eq!(p.gamma, BTreeSet::from([1]));
        assert!(p.delta.is_empty());
        assert!(matches!(partition_for_observable(&g, &BTreeSet::from([7])), Err(Error::Partition(_))));
    }

    #[test]
    fn partition_with_unobserved_downstream_branch() {
        // f0 feeds f1 and f2 (observed); f3 is downstream of f0 but unobserved
        let mut c = Circuit::new(4);
        c.push(Gate::haar(&[0, 1, 2], 0).unwrap()).unwrap(); // g0: f0
        c.push(Gate::haar(&[0, 3], 1).unwrap()).unwrap(); // g1: f1
        c.push(Gate::haar(&[1], 2).unwrap()).unwrap(); // g2: f2
        c.push(Gate::haar(&[2], 3).unwrap()).unwrap(); // g3: f3
        let g = cut_circuit(&c, &[CutSpec::new(0, 0), CutSpec::new(1, 0), CutSpec::new(2, 0)]).unwrap();
        assert_eq!(g.fragments.len(), 4);
        let p = partition_for_observable(&g, &BTreeSet::from([0, 3, 1])).unwrap();
        assert_eq!(p.kappa, BTreeSet::from([1, 2]));
        assert_eq!(p.gamma, BTreeSet::from([0]));
        assert_eq!(p.delta, BTreeSet::from([3]));
        let k = p.e_delta.len() + p.e_not_delta.len() + p.e_not_delta_to_delta.len();
        assert_eq!(k, g.edges.len());
        let r = reduce(&g, &p);
        assert!(r.fragment(3).is_none());
        assert_eq!(r.identity_outputs.len(), 1);
        assert_eq!(r.identity_outputs[0].fragment, 0);
    }

    #[test]
    fn from_channel_reorders_outputs() {
        let c = Circuit::new(2).with(Gate::named("cnot", &[0, 1]).unwrap()).unwrap();
        let f = Fragment::from_channel(0, &c, &[0], &[1], &[0]).unwrap();
        assert_eq!(f.q_out[0].local, 0);
        assert_eq!(f.c_out[0].local, 1);
        assert_eq!(f.q_in[0].local, 1);
        assert_eq!(f.subcircuit.gates()[0].qubits(), &[1, 0]);
        assert!(Fragment::from_channel(0, &c, &[], &[0], &[]).is_err());
    }
}
