//! Cayley graphs of point groups, Eulerian and Hamiltonian cycles, and DCG paths.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::rotations::{compose, PointGroup, Rotation};
use crate::simulate::{Pulse, PulseSequence, Step};

/// Label of the identity self-loops added for dynamically corrected gates.
pub const IDENTITY_LABEL: char = 'e';

const LOOKUP_TOL: f64 = 1e-7;

/// Known-good Eulerian words, kept as regression fixtures.
pub mod reference_words {
    pub const EDD: &str = "ababbaba";
    pub const TEDD: &str = "abaababbbaababbbaababbaa";
    pub const OEDD: &str = "abaaabbbabaabbbaababbaaaababbbabaabbaaaababbbabb";
    pub const IEDD: &str = concat!(
        "baaabbaabaaaaabbaaab",
        "abbbabaabbaabbabbabb",
        "abbbaaaababbbaaababb",
        "baaababbbaababbaabba",
        "abbaabbbabbbaababbba",
        "ababbbaababbbabaaaaa"
    );
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: char,
}

#[derive(Debug, Clone)]
pub struct CayleyGraph {
    pub vertices: usize,
    pub edges: Vec<Edge>,
    pub labels: Vec<char>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequenceWord {
    pub letters: Vec<char>,
}

impl SequenceWord {
    pub fn new(s: &str) -> SequenceWord {
        SequenceWord { letters: s.chars().filter(|c| !c.is_whitespace()).collect() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for SequenceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Eulerian word on the identity-augmented graph; `gate_slot` indexes the identity edge
/// reserved for the gate.
#[derive(Debug, Clone)]
pub struct DcgPath {
    pub word: SequenceWord,
    pub gate_slot: usize,
}

impl CayleyGraph {
    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.from == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.to == v).count()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.from].push(i);
        }
        for list in &mut adj {
            list.sort_by_key(|&i| (self.edges[i].label, self.edges[i].to));
        }
        adj
    }

    fn with_identity_loops(&self) -> CayleyGraph {
        let mut g = self.clone();
        for v in 0..self.vertices {
            g.edges.push(Edge { from: v, to: v, label: IDENTITY_LABEL });
        }
        g.labels.push(IDENTITY_LABEL);
        g
    }
}

fn element_index(group: &PointGroup, r: &Rotation) -> Option<usize> {
    group.index_of(r, LOOKUP_TOL)
}

pub fn build_cayley_graph(group: &PointGroup) -> Result<CayleyGraph> {
    if group.generators.is_empty() {
        return invalid("group has no generators");
    }
    if !group.elements[0].is_identity(LOOKUP_TOL) {
        return invalid("first group element must be the identity");
    }
    let mut edges = Vec::with_capacity(group.order() * group.generators.len());
    for (u, el) in group.elements.iter().enumerate() {
        for (label, g) in &group.generators {
            let v = element_index(group, &compose(g, el))
                .ok_or_else(|| Error::InvalidArgument(format!("generator {label} is not in the group")))?;
            edges.push(Edge { from: u, to: v, label: *label });
        }
    }
    Ok(CayleyGraph { vertices: group.order(), edges, labels: group.generators.iter().map(|(l, _)| *l).collect() })
}

fn hierholzer(graph: &CayleyGraph, start: usize) -> Result<Vec<usize>> {
    for v in 0..graph.vertices {
        if graph.in_degree(v) != graph.out_degree(v) {
            return Err(Error::NoEulerianCycle(format!("vertex {v} is unbalanced")));
        }
    }
    let adj = graph.adjacency();
    let mut next = vec![0usize; graph.vertices];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut circuit = Vec::with_capacity(graph.edges.len());
    while let Some(&(v, via)) = stack.last() {
        if next[v] < adj[v].len() {
            let e = adj[v][next[v]];
            next[v] += 1;
            stack.push((graph.edges[e].to, Some(e)));
        } else {
            stack.pop();
            if let Some(e) = via {
                circuit.push(e);
            }
        }
    }
    circuit.reverse();
    if circuit.len() != graph.edges.len() {
        return Err(Error::NoEulerianCycle("graph is not connected".into()));
    }
    Ok(circuit)
}

/// Hierholzer's algorithm from the identity vertex, visiting edges in
/// (label, target) order.
pub fn eulerian_cycle(graph: &CayleyGraph) -> Result<SequenceWord> {
    let circuit = hierholzer(graph, 0)?;
    Ok(SequenceWord { letters: circuit.iter().map(|&e| graph.edges[e].label).collect() })
}

/// True iff the word, read from the identity, walks every Cayley edge exactly once
/// and closes at the identity.
pub fn verify_word(word: &SequenceWord, group: &PointGroup) -> Result<bool> {
    for l in &word.letters {
        if group.generator(*l).is_none() {
            return invalid(format!("letter `{l}` is not a generator"));
        }
    }
    let graph = build_cayley_graph(group)?;
    let mut used = vec![false; graph.edges.len()];
    let ng = group.generators.len();
    let mut v = 0usize;
    for l in &word.letters {
        let k = group.generators.iter().position(|(g, _)| g == l).unwrap();
        let e = v * ng + k;
        if used[e] {
            return Ok(false);
        }
        used[e] = true;
        v = graph.edges[e].to;
    }
    Ok(v == 0 && used.iter().all(|&u| u))
}

/// Depth-first search for a cycle through every vertex once, within `budget` expansions.
pub fn hamiltonian_cycle(graph: &CayleyGraph, budget: usize) -> Result<SequenceWord> {
    let adj = graph.adjacency();
    let n = graph.vertices;
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut path: Vec<usize> = Vec::new();
    let mut expansions = 0usize;

    fn dfs(
        graph: &CayleyGraph,
        adj: &[Vec<usize>],
        v: usize,
        visited: &mut [bool],
        path: &mut Vec<usize>,
        expansions: &mut usize,
        budget: usize,
    ) -> bool {
        if path.len() == graph.vertices - 1 {
            for &e in &adj[v] {
                if graph.edges[e].to == 0 {
                    path.push(e);
                    return true;
                }
            }
            return false;
        }
        for &e in &adj[v] {
            let to = graph.edges[e].to;
            if visited[to] {
                continue;
            }
            *expansions += 1;
            if *expansions > budget {
                return false;
            }
            visited[to] = true;
            path.push(e);
            if dfs(graph, adj, to, visited, path, expansions, budget) {
                return true;
            }
            path.pop();
            visited[to] = false;
        }
        false
    }

    if n == 1 {
        return Err(Error::NotFound("trivial group".into()));
    }
    if dfs(graph, &adj, 0, &mut visited, &mut path, &mut expansions, budget) {
        Ok(SequenceWord { letters: path.iter().map(|&e| graph.edges[e].label).collect() })
    } else {
        Err(Error::NotFound(format!("no hamiltonian cycle within {budget} expansions")))
    }
}

/// Eulerian cycle on the graph with one identity self-loop per vertex, rotated so the
/// identity loop at the identity vertex comes last.
pub fn dcg_path(graph: &CayleyGraph) -> Result<DcgPath> {
    let aug = graph.with_identity_loops();
    let circuit = hierholzer(&aug, 0)?;
    let pos = circuit
        .iter()
        .position(|&e| aug.edges[e].label == IDENTITY_LABEL && aug.edges[e].from == 0)
        .expect("identity loop at vertex 0");
    let n = circuit.len();
    let letters = (0..n).map(|k| aug.edges[circuit[(pos + 1 + k) % n]].label).collect();
    Ok(DcgPath { word: SequenceWord { letters }, gate_slot: n - 1 })
}

/// Each letter becomes a pulse preceded by a free interval `tau0`. The identity label maps
/// to an identity slot.
pub fn word_to_pulses(word: &SequenceWord, group: &PointGroup, tau0: f64) -> Result<PulseSequence> {
    let mut steps = Vec::with_capacity(word.len());
    for l in &word.letters {
        let pulse = if *l == IDENTITY_LABEL {
            Pulse::Identity
        } else {
            let g = group
                .generator(*l)
                .ok_or_else(|| Error::InvalidArgument(format!("letter `{l}` is not a generator")))?;
            let (axis, angle) = g.axis_angle();
            Pulse::Rotation { axis, angle }
        };
        steps.push(Step { interval: tau0, pulse });
    }
    Ok(PulseSequence { steps, word: Some(word.to_string()), group: Some(group.name.clone()), gate_slot: None })
}

pub fn dcg_pulses(path: &DcgPath, group: &PointGroup, tau0: f64) -> Result<PulseSequence> {
    let mut seq = word_to_pulses(&path.word, group, tau0)?;
    seq.gate_slot = Some(path.gate_slot);
    Ok(seq)
}

/// Eulerian word for one of the named groups.
pub fn standard_word(group: &PointGroup) -> Result<SequenceWord> {
    eulerian_cycle(&build_cayley_graph(group)?)
}
