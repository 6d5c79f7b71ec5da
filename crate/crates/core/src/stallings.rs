//! Membership in finitely generated subgroups of a free group via folded
//! subgroup graphs: each generator becomes a loop at the base vertex, the
//! labeled graph is folded to a deterministic one with union-find, and a
//! word belongs to the subgroup iff it traces from the base back to the
//! base.

use alloc::vec;
use alloc::vec::Vec;

use crate::group::Letter;

#[derive(Debug, Clone)]
pub struct SubgroupGraph {
    rank: usize,
    /// Union-find parents; edge tables are authoritative on roots only.
    parent: Vec<u32>,
    /// next[v][slot] = target of the edge reading that letter at v.  Both
    /// directions of every edge are stored (slot and inverse slot).
    next: Vec<Vec<Option<u32>>>,
    base: u32,
}

impl SubgroupGraph {
    pub fn new(rank: usize) -> Self {
        SubgroupGraph {
            rank,
            parent: vec![0],
            next: vec![vec![None; rank * 2]],
            base: 0,
        }
    }

    fn find(&self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            v = self.parent[v as usize];
        }
        v
    }

    fn target(&self, v: u32, slot: usize) -> Option<u32> {
        self.next[v as usize][slot].map(|t| self.find(t))
    }

    fn add_vertex(&mut self) -> u32 {
        let id = self.next.len() as u32;
        self.parent.push(id);
        self.next.push(vec![None; self.rank * 2]);
        id
    }

    /// Installs one edge direction, folding targets on conflict.
    fn add_half_edge(&mut self, from: u32, slot: usize, to: u32) {
        let from = self.find(from);
        let to = self.find(to);
        match self.target(from, slot) {
            None => self.next[from as usize][slot] = Some(to),
            Some(u) if u == to => {}
            Some(u) => self.merge(u, to),
        }
    }

    fn add_edge(&mut self, from: u32, letter: Letter, to: u32) {
        self.add_half_edge(from, letter.slot(), to);
        // Re-canonicalize: the forward insertion may have folded something.
        let from = self.find(from);
        let to = self.find(to);
        self.add_half_edge(to, letter.inverse().slot(), from);
    }

    /// Folds two vertices together, propagating through equal-label edges.
    fn merge(&mut self, a: u32, b: u32) {
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            // The smaller id survives, so the base vertex 0 is never lost.
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            self.parent[drop as usize] = keep;
            for slot in 0..self.rank * 2 {
                if let Some(t) = self.next[drop as usize][slot] {
                    let t = self.find(t);
                    match self.target(keep, slot) {
                        None => self.next[keep as usize][slot] = Some(t),
                        Some(u) if u == t => {}
                        Some(u) => stack.push((u, t)),
                    }
                }
                self.next[drop as usize][slot] = None;
            }
        }
    }

    /// Trace a reduced word from the base; None when some step is missing.
    fn trace(&self, letters: &[Letter]) -> Option<u32> {
        let mut v = self.find(self.base);
        for &l in letters {
            v = self.target(v, l.slot())?;
        }
        Some(v)
    }

    /// Membership test for a freely reduced word.
    pub fn accepts(&self, letters: &[Letter]) -> bool {
        self.trace(letters) == Some(self.find(self.base))
    }

    /// Adjoins a generator: a fresh loop spelling the word at the base,
    /// folded as it is laid down.
    pub fn add_word(&mut self, letters: &[Letter]) {
        if letters.is_empty() {
            return;
        }
        let mut v = self.find(self.base);
        for (i, &l) in letters.iter().enumerate() {
            let to = if i + 1 == letters.len() {
                self.find(self.base)
            } else {
                self.add_vertex()
            };
            self.add_edge(v, l, to);
            v = self.find(to);
        }
    }

    /// Live vertex count (folded graphs stay small).
    pub fn vertex_count(&self) -> usize {
        (0..self.parent.len() as u32)
            .filter(|&v| self.find(v) == v)
            .count()
    }
}

/// Greedy generating-set reduction: keep a word only when the graph built
/// from the earlier keepers does not already accept it.
pub fn reduce_generating_words<'a, I>(rank: usize, words: I) -> (SubgroupGraph, Vec<&'a [Letter]>)
where
    I: IntoIterator<Item = &'a [Letter]>,
{
    let mut graph = SubgroupGraph::new(rank);
    let mut kept = Vec::new();
    for w in words {
        if w.is_empty() {
            continue;
        }
        if !graph.accepts(w) {
            graph.add_word(w);
            kept.push(w);
        }
    }
    (graph, kept)
}
