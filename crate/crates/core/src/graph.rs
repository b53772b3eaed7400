//! Small directed-graph helpers over ordered node keys.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, Default)]
pub struct Digraph<N: Ord + Clone> {
    succ: BTreeMap<N, BTreeSet<N>>,
}

impl<N: Ord + Clone> Digraph<N> {
    pub fn new() -> Self {
        Self {
            succ: BTreeMap::new(),
        }
    }

    pub fn add_node(&mut self, n: N) {
        self.succ.entry(n).or_default();
    }

    pub fn add_edge(&mut self, from: N, to: N) {
        self.succ.entry(to.clone()).or_default();
        self.succ.entry(from).or_default().insert(to);
    }

    pub fn contains_edge(&self, from: &N, to: &N) -> bool {
        self.succ.get(from).is_some_and(|s| s.contains(to))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &N> {
        self.succ.keys()
    }

    pub fn successors(&self, n: &N) -> impl Iterator<Item = &N> {
        self.succ.get(n).into_iter().flatten()
    }

    /// Nodes reachable from `from` by a path of at least one edge.
    pub fn reachable_from(&self, from: &N) -> BTreeSet<N> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&N> = self.successors(from).collect();
        while let Some(n) = queue.pop_front() {
            if seen.insert(n.clone()) {
                queue.extend(self.successors(n));
            }
        }
        seen
    }

    /// True iff a path of length >= 1 leads from `from` to `to`.
    pub fn has_path(&self, from: &N, to: &N) -> bool {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&N> = self.successors(from).collect();
        while let Some(n) = queue.pop_front() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                queue.extend(self.successors(n));
            }
        }
        false
    }

    /// Strongly connected components (Tarjan), each sorted, listed in
    /// order of their least node.
    pub fn strongly_connected_components(&self) -> Vec<Vec<N>> {
        let nodes: Vec<&N> = self.succ.keys().collect();
        let index_of: BTreeMap<&N, usize> =
            nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let adj: Vec<Vec<usize>> = nodes
            .iter()
            .map(|n| self.successors(n).map(|m| index_of[m]).collect())
            .collect();

        let n = nodes.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next = 0;
        let mut comps: Vec<Vec<N>> = Vec::new();

        // Iterative Tarjan: frames of (node, next child position).
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut frames = vec![(root, 0usize)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
                if *pos < adj[v].len() {
                    let w = adj[v][*pos];
                    *pos += 1;
                    if index[w] == usize::MAX {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    frames.pop();
                    if let Some(&(parent, _)) = frames.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp.push(nodes[w].clone());
                            if w == v {
                                break;
                            }
                        }
                        comp.sort();
                        comps.push(comp);
                    }
                }
            }
        }
        comps.sort();
        comps
    }

    pub fn is_acyclic(&self) -> bool {
        self.succ.iter().all(|(n, s)| !s.contains(n))
            && self
                .strongly_connected_components()
                .iter()
                .all(|c| c.len() == 1)
    }
}

pub fn is_acyclic<'a>(
    nodes: impl Iterator<Item = &'a str>,
    edges: impl Iterator<Item = (&'a str, &'a str)>,
) -> bool {
    let mut g = Digraph::new();
    for n in nodes {
        g.add_node(n);
    }
    for (a, b) in edges {
        g.add_edge(a, b);
    }
    g.is_acyclic()
}
