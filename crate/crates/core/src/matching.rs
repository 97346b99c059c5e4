//! Maximum-cardinality bipartite matching (Hopcroft–Karp).

use std::collections::VecDeque;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BipartiteGraph {
    num_right: usize,
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(num_left: usize, num_right: usize) -> Self {
        BipartiteGraph {
            num_right,
            adj: vec![Vec::new(); num_left],
        }
    }

    pub fn from_adjacency(num_right: usize, adj: Vec<Vec<usize>>) -> Self {
        debug_assert!(adj.iter().flatten().all(|&r| r < num_right));
        BipartiteGraph { num_right, adj }
    }

    pub fn add_edge(&mut self, left: usize, right: usize) {
        assert!(right < self.num_right, "right vertex {right} out of range");
        self.adj[left].push(right);
    }

    pub fn num_left(&self) -> usize {
        self.adj.len()
    }

    pub fn num_right(&self) -> usize {
        self.num_right
    }

    pub fn neighbors(&self, left: usize) -> &[usize] {
        &self.adj[left]
    }

    pub fn has_edge(&self, left: usize, right: usize) -> bool {
        self.adj[left].contains(&right)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    mate: Vec<Option<usize>>,
}

impl Matching {
    /// Right partner of a left vertex.
    pub fn mate(&self, left: usize) -> Option<usize> {
        self.mate[left]
    }

    pub fn len(&self) -> usize {
        self.mate.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(left, right)` pairs in left order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mate
            .iter()
            .enumerate()
            .filter_map(|(l, r)| r.map(|r| (l, r)))
    }

    /// Every left vertex is matched.
    pub fn covers_left(&self, g: &BipartiteGraph) -> bool {
        self.len() == g.num_left()
    }
}

const UNSEEN: usize = usize::MAX;

pub fn max_matching(g: &BipartiteGraph) -> Matching {
    let left = g.num_left();
    let mut mate_l: Vec<usize> = vec![UNSEEN; left];
    let mut mate_r: Vec<usize> = vec![UNSEEN; g.num_right];
    let mut dist = vec![0usize; left];

    // greedy warm start
    for (l, row) in g.adj.iter().enumerate() {
        if let Some(&r) = row.iter().find(|&&r| mate_r[r] == UNSEEN) {
            mate_l[l] = r;
            mate_r[r] = l;
        }
    }

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..left {
            if mate_l[l] == UNSEEN {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = UNSEEN;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &g.adj[l] {
                let next = mate_r[r];
                if next == UNSEEN {
                    found = true;
                } else if dist[next] == UNSEEN {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }
        let mut augmented = false;
        for l in 0..left {
            if mate_l[l] == UNSEEN && augment(g, l, &mut mate_l, &mut mate_r, &mut dist) {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }

    Matching {
        mate: mate_l
            .into_iter()
            .map(|r| (r != UNSEEN).then_some(r))
            .collect(),
    }
}

fn augment(
    g: &BipartiteGraph,
    l: usize,
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &r in &g.adj[l] {
        let next = mate_r[r];
        let ok = if next == UNSEEN {
            true
        } else {
            dist[next] == dist[l].wrapping_add(1) && augment(g, next, mate_l, mate_r, dist)
        };
        if ok {
            mate_l[l] = r;
            mate_r[r] = l;
            return true;
        }
    }
    dist[l] = UNSEEN;
    false
}
