//! Condensation of the region automaton, thickness of components and the paths through them.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::TimedAutomaton;
use crate::region::RegionAutomaton;
use crate::zone::Zone;

pub const DEFAULT_PATH_CAP: usize = 10_000;
pub const DEFAULT_CYCLE_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Component,
    Transient,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    /// Region-automaton states, sorted.
    pub states: Vec<usize>,
}

/// The DAG of components and transient states.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentGraph {
    pub nodes: Vec<Node>,
    pub node_of: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub initial_nodes: Vec<usize>,
    /// Nodes on the longest path from an initial node.
    pub diameter: usize,
    #[serde(skip)]
    succ: Vec<Vec<usize>>,
    #[serde(skip)]
    topo: Vec<usize>,
}

impl ComponentGraph {
    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }

    pub fn components(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&n| self.nodes[n].kind == NodeKind::Component)
    }

    pub fn component_count(&self) -> usize {
        self.components().count()
    }

    pub fn transient_states(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Transient)
            .flat_map(|n| n.states.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Nodes in topological order.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }
}

/// Strongly connected components of the region automaton (iterative Tarjan).
fn tarjan(ra: &RegionAutomaton) -> Vec<Vec<usize>> {
    let m = ra.m();
    let succ: Vec<Vec<usize>> = (0..m).map(|s| ra.successors(s)).collect();
    let mut index = vec![usize::MAX; m];
    let mut low = vec![0usize; m];
    let mut on_stack = vec![false; m];
    let mut stack = Vec::new();
    let mut sccs = Vec::new();
    let mut next_index = 0;
    for root in 0..m {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    scc.sort_unstable();
                    sccs.push(scc);
                }
            }
        }
    }
    // Tarjan emits components in reverse topological order
    sccs.reverse();
    sccs
}

pub fn condense(ra: &RegionAutomaton) -> ComponentGraph {
    let sccs = tarjan(ra);
    let mut node_of = vec![0; ra.m()];
    let mut nodes = Vec::with_capacity(sccs.len());
    for (n, scc) in sccs.into_iter().enumerate() {
        for &s in &scc {
            node_of[s] = n;
        }
        let kind = if scc.len() == 1 && ra.outgoing(scc[0]).all(|e| e.target != scc[0]) {
            NodeKind::Transient
        } else {
            NodeKind::Component
        };
        nodes.push(Node { kind, states: scc });
    }
    let mut edge_set = BTreeSet::new();
    for e in &ra.edges {
        let (a, b) = (node_of[e.source], node_of[e.target]);
        if a != b {
            edge_set.insert((a, b));
        }
    }
    let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
    let mut succ = vec![Vec::new(); nodes.len()];
    for &(a, b) in &edges {
        succ[a].push(b);
    }
    let topo: Vec<usize> = (0..nodes.len()).collect();
    let mut initial_nodes: Vec<usize> = ra.initial.iter().map(|&s| node_of[s]).collect();
    initial_nodes.sort_unstable();
    initial_nodes.dedup();

    // longest path in nodes, over nodes reachable from an initial node
    let mut depth = vec![0usize; nodes.len()];
    for &n in &initial_nodes {
        depth[n] = 1;
    }
    for &n in &topo {
        if depth[n] == 0 {
            continue;
        }
        for &t in &succ[n] {
            depth[t] = depth[t].max(depth[n] + 1);
        }
    }
    let diameter = depth.iter().copied().max().unwrap_or(0);
    ComponentGraph { nodes, node_of, edges, initial_nodes, diameter, succ, topo }
}

/// A cycle of the region automaton given by its edge ids, starting at `anchor`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cycle {
    pub anchor: usize,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ThicknessVerdict {
    /// `power`-fold iteration of the cycle connects every pair of corners of the anchor region.
    Thick { cycle: Cycle, power: usize },
    Thin,
    Unknown { reason: String },
}

impl ThicknessVerdict {
    pub fn is_thick(&self) -> bool {
        matches!(self, ThicknessVerdict::Thick { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ThicknessVerdict::Thick { .. } => "thick",
            ThicknessVerdict::Thin => "thin",
            ThicknessVerdict::Unknown { .. } => "unknown",
        }
    }
}

/// Orbit matrix of a cycle: `M[i][j]` iff corner `j` of the anchor region lies in
/// the closed post-image of corner `i` after one traversal.
fn orbit_matrix(ra: &RegionAutomaton, automaton: &TimedAutomaton, cycle: &Cycle) -> Option<Vec<Vec<bool>>> {
    let anchor = &ra.states[cycle.anchor].region;
    if !anchor.is_bounded() {
        return None;
    }
    let corners = anchor.closure_corners();
    let mut matrix = vec![vec![false; corners.len()]; corners.len()];
    for (i, c) in corners.iter().enumerate() {
        let mut z = Zone::from_valuation(c);
        for &e in &cycle.edges {
            let edge = &ra.edges[e];
            let t = &automaton.transitions[edge.transition];
            z.up();
            let mut g = edge.guard_region.to_zone();
            g.close();
            z.intersect(&g);
            z.reset(&t.resets);
            if z.is_empty() {
                break;
            }
        }
        for (j, d) in corners.iter().enumerate() {
            matrix[i][j] = z.contains_point(&d.values);
        }
    }
    Some(matrix)
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    out[i][j] |= b[k][j];
                }
            }
        }
    }
    out
}

/// Smallest power at which the boolean matrix is all-ones, within the Wielandt bound.
fn primitive_power(m: &[Vec<bool>]) -> Option<usize> {
    let n = m.len();
    let bound = (n - 1) * (n - 1) + 1;
    let mut p = m.to_vec();
    for k in 1..=bound {
        if p.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(k);
        }
        p = bool_mul(&p, m);
    }
    None
}

/// Simple cycles through `root` over the given edges, restricted to states with id >= root.
fn cycles_from(
    ra: &RegionAutomaton,
    root: usize,
    allowed_edge: &dyn Fn(usize) -> bool,
    in_scope: &dyn Fn(usize) -> bool,
    budget: &mut usize,
    visit: &mut dyn FnMut(Cycle) -> bool,
) -> bool {
    let mut path: Vec<usize> = Vec::new();
    let mut on_path = vec![root];
    let mut iters: Vec<(usize, usize)> = vec![(root, 0)];
    while let Some(&mut (v, ref mut i)) = iters.last_mut() {
        let out = ra.outgoing_ids(v);
        if *i >= out.len() {
            iters.pop();
            on_path.pop();
            path.pop();
            continue;
        }
        let e = out[*i];
        *i += 1;
        if !allowed_edge(e) {
            continue;
        }
        let t = ra.edges[e].target;
        if t == root {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            let mut edges = path.clone();
            edges.push(e);
            if visit(Cycle { anchor: root, edges }) {
                return true;
            }
        } else if t > root && in_scope(t) && !on_path.contains(&t) {
            path.push(e);
            on_path.push(t);
            iters.push((t, 0));
        }
    }
    false
}

pub fn is_thick(graph: &ComponentGraph, node: usize, ra: &RegionAutomaton, automaton: &TimedAutomaton) -> ThicknessVerdict {
    is_thick_with_cap(graph, node, ra, automaton, DEFAULT_CYCLE_CAP)
}

/// Looks for a forgetful cycle among the simple fleshy progress cycles of a component.
pub fn is_thick_with_cap(
    graph: &ComponentGraph,
    node: usize,
    ra: &RegionAutomaton,
    automaton: &TimedAutomaton,
    cycle_cap: usize,
) -> ThicknessVerdict {
    let states = &graph.nodes[node].states;
    if graph.nodes[node].kind == NodeKind::Transient {
        return ThicknessVerdict::Thin;
    }
    let n_clocks = automaton.num_clocks();
    let in_scope = |s: usize| graph.node_of[s] == node;
    let fleshy = |e: usize| {
        let edge = &ra.edges[e];
        in_scope(edge.target) && in_scope(edge.source) && edge.guard_region.is_fleshy()
    };

    if !has_fleshy_progress_cycle(graph, node, ra, automaton) {
        return ThicknessVerdict::Thin;
    }

    let mut budget = cycle_cap;
    let mut found: Option<(Cycle, usize)> = None;
    let mut unevaluated = false;
    for &root in states {
        let mut visit = |cycle: Cycle| -> bool {
            let mut reset = vec![false; n_clocks];
            for &e in &cycle.edges {
                for &x in &automaton.transitions[ra.edges[e].transition].resets {
                    reset[x] = true;
                }
            }
            if !reset.iter().all(|&r| r) {
                return false;
            }
            // anchor the cycle at its first bounded region
            let k = cycle.edges.len();
            let start = (0..k).find(|&i| ra.states[ra.edges[cycle.edges[i]].source].region.is_bounded());
            let Some(start) = start else {
                unevaluated = true;
                return false;
            };
            let rotated = Cycle {
                anchor: ra.edges[cycle.edges[start]].source,
                edges: (0..k).map(|i| cycle.edges[(start + i) % k]).collect(),
            };
            let matrix = orbit_matrix(ra, automaton, &rotated).expect("anchor is bounded");
            if let Some(p) = primitive_power(&matrix) {
                found = Some((rotated, p));
                return true;
            }
            false
        };
        let complete = cycles_from(ra, root, &fleshy, &in_scope, &mut budget, &mut visit);
        if let Some((cycle, power)) = found {
            return ThicknessVerdict::Thick { cycle, power };
        }
        if !complete && budget == 0 {
            return ThicknessVerdict::Unknown { reason: format!("cycle enumeration cap {} reached", cycle_cap) };
        }
    }
    let reason = if unevaluated {
        "fleshy progress cycles only visit regions with unbounded clocks".to_string()
    } else {
        "no simple fleshy progress cycle has a complete orbit relation".to_string()
    };
    ThicknessVerdict::Unknown { reason }
}

/// Whether some cycle (not necessarily simple) made of fleshy edges resets every clock.
fn has_fleshy_progress_cycle(graph: &ComponentGraph, node: usize, ra: &RegionAutomaton, automaton: &TimedAutomaton) -> bool {
    let states = &graph.nodes[node].states;
    let local: std::collections::HashMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = states.len();
    let mut adj = vec![Vec::new(); k];
    for (i, &s) in states.iter().enumerate() {
        for &e in ra.outgoing_ids(s) {
            let edge = &ra.edges[e];
            if let Some(&j) = local.get(&edge.target) {
                if edge.guard_region.is_fleshy() {
                    adj[i].push((j, e));
                }
            }
        }
    }
    // SCCs of the fleshy subgraph, by mutual reachability
    let reach = |from: usize| {
        let mut seen = vec![false; k];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    let reach_all: Vec<Vec<bool>> = (0..k).map(reach).collect();
    let mut done = vec![false; k];
    for i in 0..k {
        if done[i] {
            continue;
        }
        let members: Vec<usize> = (0..k).filter(|&j| reach_all[i][j] && reach_all[j][i]).collect();
        for &j in &members {
            done[j] = true;
        }
        let mut reset = vec![false; automaton.num_clocks()];
        let mut has_edge = false;
        for &a in &members {
            for &(b, e) in &adj[a] {
                if members.contains(&b) {
                    has_edge = true;
                    for &x in &automaton.transitions[ra.edges[e].transition].resets {
                        reset[x] = true;
                    }
                }
            }
        }
        if has_edge && reset.iter().all(|&r| r) {
            return true;
        }
    }
    false
}

/// A transient prefix followed by an optional component with its distinguished exit state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtendedComponent {
    pub prefix: Vec<usize>,
    pub component: Option<usize>,
    pub exit_state: Option<usize>,
}

/// A path of the condensation DAG starting at an initial node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathPi {
    pub nodes: Vec<usize>,
}

/// One slot of a path: a transient state or a component, with the exit state
/// that must be used to move on (absent on the last slot).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub node: usize,
    pub transient: bool,
    pub exit_state: Option<usize>,
}

/// A path with every exit state fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BarPath {
    pub path: PathPi,
    pub slots: Vec<Slot>,
}

impl BarPath {
    pub fn extended_components(&self, graph: &ComponentGraph) -> Vec<ExtendedComponent> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        for slot in &self.slots {
            if slot.transient {
                prefix.push(graph.nodes[slot.node].states[0]);
            } else {
                out.push(ExtendedComponent {
                    prefix: std::mem::take(&mut prefix),
                    component: Some(slot.node),
                    exit_state: slot.exit_state,
                });
            }
        }
        if !prefix.is_empty() {
            out.push(ExtendedComponent { prefix, component: None, exit_state: None });
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathEnumeration {
    pub paths: Vec<BarPath>,
    pub truncated: bool,
}

/// Nodes reachable from an initial node and co-reachable to a node holding an accepting state.
pub fn useful_nodes(graph: &ComponentGraph, ra: &RegionAutomaton) -> Vec<bool> {
    let n = graph.nodes.len();
    let mut fwd = vec![false; n];
    for &i in &graph.initial_nodes {
        fwd[i] = true;
    }
    for &v in graph.topological_order() {
        if fwd[v] {
            for &w in graph.successors(v) {
                fwd[w] = true;
            }
        }
    }
    let mut bwd: Vec<bool> = graph.nodes.iter().map(|node| node.states.iter().any(|&s| ra.is_final[s])).collect();
    for &v in graph.topological_order().iter().rev() {
        if graph.successors(v).iter().any(|&w| bwd[w]) {
            bwd[v] = true;
        }
    }
    (0..n).map(|i| fwd[i] && bwd[i]).collect()
}

/// Maximal paths of the DAG restricted to useful nodes, each expanded over exit-state choices.
pub fn enumerate_paths(graph: &ComponentGraph, ra: &RegionAutomaton, cap: usize) -> PathEnumeration {
    let useful = useful_nodes(graph, ra);
    let mut paths = Vec::new();
    let mut truncated = false;
    let succ = |v: usize| graph.successors(v).iter().copied().filter(|&w| useful[w]).collect::<Vec<_>>();
    'outer: for &start in &graph.initial_nodes {
        if !useful[start] {
            continue;
        }
        let mut stack: Vec<Vec<usize>> = vec![vec![start]];
        while let Some(path) = stack.pop() {
            let last = *path.last().expect("non-empty");
            let next = succ(last);
            if next.is_empty() {
                for bar in expand_exits(graph, ra, &path) {
                    if paths.len() >= cap {
                        truncated = true;
                        break 'outer;
                    }
                    paths.push(bar);
                }
                continue;
            }
            for &w in next.iter().rev() {
                let mut p = path.clone();
                p.push(w);
                stack.push(p);
            }
        }
    }
    PathEnumeration { paths, truncated }
}

fn expand_exits(graph: &ComponentGraph, ra: &RegionAutomaton, nodes: &[usize]) -> Vec<BarPath> {
    let mut choices: Vec<Vec<Option<usize>>> = Vec::with_capacity(nodes.len());
    for (i, &n) in nodes.iter().enumerate() {
        let node = &graph.nodes[n];
        if node.kind == NodeKind::Transient || i + 1 == nodes.len() {
            choices.push(vec![if node.kind == NodeKind::Transient { Some(node.states[0]) } else { None }]);
            continue;
        }
        let next = nodes[i + 1];
        let exits: Vec<Option<usize>> = node
            .states
            .iter()
            .copied()
            .filter(|&s| ra.outgoing(s).any(|e| graph.node_of[e.target] == next))
            .map(Some)
            .collect();
        choices.push(exits);
    }
    let mut out = vec![Vec::<Slot>::new()];
    for (i, opts) in choices.iter().enumerate() {
        let n = nodes[i];
        let transient = graph.nodes[n].kind == NodeKind::Transient;
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for &exit in opts {
                let mut p = prefix.clone();
                p.push(Slot { node: n, transient, exit_state: exit });
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(|slots| BarPath { path: PathPi { nodes: nodes.to_vec() }, slots }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentDoc {
    pub node: usize,
    pub states: Vec<usize>,
    pub thickness: ThicknessVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentsDocument {
    pub m: usize,
    pub components: Vec<ComponentDoc>,
    pub transient_states: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub diameter: usize,
}

pub fn components_document(graph: &ComponentGraph, ra: &RegionAutomaton, automaton: &TimedAutomaton) -> ComponentsDocument {
    ComponentsDocument {
        m: ra.m(),
        components: graph
            .components()
            .map(|n| ComponentDoc {
                node: n,
                states: graph.nodes[n].states.clone(),
                thickness: is_thick(graph, n, ra, automaton),
            })
            .collect(),
        transient_states: graph.transient_states(),
        edges: graph.edges.clone(),
        diameter: graph.diameter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::build_region_automaton;
    use crate::test_support::*;

    fn setup(json: &str) -> (TimedAutomaton, RegionAutomaton, ComponentGraph) {
        let a = load(json);
        let ra = build_region_automaton(&a).unwrap();
        let g = condense(&ra);
        (a, ra, g)
    }

    /// Independent oracle: SCCs via mutual reachability computed by transitive closure.
    fn scc_oracle(ra: &RegionAutomaton) -> Vec<BTreeSet<usize>> {
        let m = ra.m();
        let mut reach = vec![vec![false; m]; m];
        for (s, row) in reach.iter_mut().enumerate() {
            row[s] = true;
            for t in ra.successors(s) {
                row[t] = true;
            }
        }
        for k in 0..m {
            for i in 0..m {
                if reach[i][k] {
                    for j in 0..m {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut out: Vec<BTreeSet<usize>> = Vec::new();
        for i in 0..m {
            let c: BTreeSet<usize> = (0..m).filter(|&j| reach[i][j] && reach[j][i]).collect();
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    #[test]
    fn condensation_matches_oracle() {
        for json in [LOOP_JSON, TWO_CLOCK_JSON, ALTERNATING_JSON, LINEAR_JSON, DIAMOND_JSON, NEVER_RESET_JSON, BRANCHING_JSON] {
            let (_, ra, g) = setup(json);
            let mut ours: Vec<BTreeSet<usize>> = g.nodes.iter().map(|n| n.states.iter().copied().collect()).collect();
            let mut oracle = scc_oracle(&ra);
            ours.sort();
            oracle.sort();
            assert_eq!(ours, oracle);
            for &(a, b) in &g.edges {
                let pa = g.topological_order().iter().position(|&x| x == a).unwrap();
                let pb = g.topological_order().iter().position(|&x| x == b).unwrap();
                assert!(pa < pb);
            }
        }
    }

    #[test]
    fn loop_automaton_is_one_component() {
        let (_, _, g) = setup(LOOP_JSON);
        assert_eq!(g.component_count(), 1);
        assert!(g.transient_states().is_empty());
        assert_eq!(g.diameter, 1);
    }

    #[test]
    fn linear_automaton_is_all_transient() {
        let (_, ra, g) = setup(LINEAR_JSON);
        assert_eq!(g.component_count(), 0);
        assert_eq!(g.transient_states().len(), ra.m());
        assert_eq!(ra.m(), 3);
        assert_eq!(g.diameter, 3);
    }

    #[test]
    fn bridged_loops_have_diameter_two() {
        let a = crate::corpus::two_phase();
        let ra = build_region_automaton(&a).unwrap();
        let g = condense(&ra);
        assert_eq!(g.component_count(), 2);
        assert_eq!(g.diameter, 2);
        assert_eq!(ra.m(), 2);
    }

    #[test]
    fn thickness_examples() {
        let (a, ra, g) = setup(LOOP_JSON);
        let v = is_thick(&g, g.components().next().unwrap(), &ra, &a);
        assert!(v.is_thick(), "{:?}", v);
        let (a, ra, g) = setup(NEVER_RESET_JSON);
        for c in g.components() {
            assert_eq!(is_thick(&g, c, &ra, &a), ThicknessVerdict::Thin);
        }
        let a = crate::corpus::thin_punctual();
        let ra = build_region_automaton(&a).unwrap();
        let g = condense(&ra);
        for c in g.components() {
            assert_eq!(is_thick(&g, c, &ra, &a), ThicknessVerdict::Thin);
        }
    }

    #[test]
    fn thickness_does_not_depend_on_state_numbering() {
        let (a, ra, g) = setup(ALTERNATING_JSON);
        let verdicts: Vec<&'static str> = g.components().map(|c| is_thick(&g, c, &ra, &a).label()).collect();
        assert!(verdicts.iter().all(|&v| v == "thick"), "{:?}", verdicts);
    }

    #[test]
    fn orbit_primitivity() {
        assert_eq!(primitive_power(&[vec![true]]), Some(1));
        assert_eq!(primitive_power(&[vec![false, true], vec![true, false]]), None);
        assert_eq!(primitive_power(&[vec![true, true], vec![true, false]]), Some(2));
    }

    #[test]
    fn diamond_has_two_paths() {
        let (_, ra, g) = setup(DIAMOND_JSON);
        let e = enumerate_paths(&g, &ra, 100);
        let distinct: BTreeSet<Vec<usize>> = e.paths.iter().map(|p| p.path.nodes.clone()).collect();
        assert_eq!(distinct.len(), 2);
        assert!(!e.truncated);
        let capped = enumerate_paths(&g, &ra, 1);
        assert!(capped.truncated);
        assert_eq!(capped.paths.len(), 1);
    }

    #[test]
    fn single_component_has_single_path() {
        let (_, ra, g) = setup(LOOP_JSON);
        let e = enumerate_paths(&g, &ra, 100);
        assert_eq!(e.paths.len(), 1);
        assert_eq!(e.paths[0].slots.len(), 1);
        assert_eq!(e.paths[0].slots[0].exit_state, None);
    }

    #[test]
    fn exit_states_are_expanded() {
        let (_, ra, g) = setup(ALTERNATING_JSON);
        let e = enumerate_paths(&g, &ra, 100);
        for p in &e.paths {
            for (i, slot) in p.slots.iter().enumerate() {
                if let Some(x) = slot.exit_state {
                    assert!(g.nodes[slot.node].states.contains(&x));
                    let next = p.slots[i + 1].node;
                    assert!(ra.outgoing(x).any(|edge| g.node_of[edge.target] == next));
                }
            }
            let ext = p.extended_components(&g);
            assert!(!ext.is_empty());
        }
    }
}
