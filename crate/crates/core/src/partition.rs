//! Clique partitions.
//!
//! The exact solver colors the complement graph with a DSATUR-ordered
//! branch and bound: a color class of the complement is an independent set
//! there, hence a clique of the original graph. Ties are broken by the lowest
//! vertex index everywhere so results are reproducible.

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default vertex cap for the exact solvers.
pub const EXACT_CAP: usize = 64;
/// Vertex cap for exhaustive set-partition enumeration.
pub const BRUTEFORCE_CAP: usize = 10;

/// A partition of `0..n` into cliques, blocks sorted by their smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliquePartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl CliquePartition {
    /// Validates disjointness, coverage and that every block is a clique of `g`.
    pub fn new(g: &Graph, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = g.len();
        let mut seen = VertexSet::empty(n);
        let mut canon = Vec::with_capacity(blocks.len());
        for block in blocks {
            if block.is_empty() {
                return Err(Error::Invalid("empty block in partition".into()));
            }
            let mut set = VertexSet::empty(n);
            for &v in &block {
                if v >= n {
                    return Err(Error::Invalid(format!("vertex {v} outside 0..{n}")));
                }
                if seen.contains(v) {
                    return Err(Error::Invalid(format!("vertex {v} appears in two blocks")));
                }
                seen.insert(v);
                set.insert(v);
            }
            if !g.is_clique(&set) {
                return Err(Error::Invalid(format!("block {:?} is not a clique", set.to_vec())));
            }
            canon.push(set.to_vec());
        }
        if seen.len() != n {
            return Err(Error::Invalid(format!(
                "partition covers {} of {n} vertices",
                seen.len()
            )));
        }
        canon.sort_by_key(|b| b[0]);
        Ok(Self { n, blocks: canon })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    /// Number of blocks.
    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block index of every vertex.
    pub fn block_of(&self) -> Vec<usize> {
        let mut map = vec![0; self.n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                map[v] = i;
            }
        }
        map
    }

    fn from_classes(g: &Graph, classes: Vec<VertexSet>) -> Self {
        let blocks = classes
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|c| c.to_vec())
            .collect();
        Self::new(g, blocks).expect("solver produced an invalid clique partition")
    }
}

fn check_cap(g: &Graph, cap: usize, hint: &'static str) -> Result<()> {
    if g.len() > cap {
        Err(Error::CapExceeded {
            what: "exact solver",
            needed: g.len() as u128,
            cap,
            hint,
        })
    } else {
        Ok(())
    }
}

/// Minimum clique partition; its size is `γ(G)`.
pub fn clique_partition_exact(g: &Graph) -> Result<CliquePartition> {
    clique_partition_exact_capped(g, EXACT_CAP)
}

pub fn clique_partition_exact_capped(g: &Graph, cap: usize) -> Result<CliquePartition> {
    check_cap(g, cap, "; use the greedy solver")?;
    let classes = dsatur_branch_and_bound(&g.complement());
    Ok(CliquePartition::from_classes(g, classes))
}

/// Which clique-partition solver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    Exact,
    Greedy,
    /// Exact up to the cap, greedy above it.
    #[default]
    Auto,
}

/// Runs the selected solver; the flag reports whether the result is optimal.
pub fn solve(g: &Graph, solver: Solver, exact_cap: usize) -> Result<(CliquePartition, bool)> {
    match solver {
        Solver::Exact => clique_partition_exact_capped(g, exact_cap).map(|p| (p, true)),
        Solver::Greedy => Ok((clique_partition_greedy(g), false)),
        Solver::Auto if g.len() <= exact_cap => {
            clique_partition_exact_capped(g, exact_cap).map(|p| (p, true))
        }
        Solver::Auto => Ok((clique_partition_greedy(g), false)),
    }
}

/// First-fit: each vertex joins the first block it is fully adjacent to.
pub fn clique_partition_greedy(g: &Graph) -> CliquePartition {
    let n = g.len();
    let mut blocks: Vec<VertexSet> = Vec::new();
    for v in 0..n {
        match blocks.iter_mut().find(|b| b.is_subset(g.neighbors(v))) {
            Some(b) => b.insert(v),
            None => blocks.push(VertexSet::from_indices(n, [v])),
        }
    }
    CliquePartition::from_classes(g, blocks)
}

/// Exhaustive minimum over all set partitions (restricted growth strings).
pub fn clique_partition_bruteforce(g: &Graph) -> Result<CliquePartition> {
    let n = g.len();
    if n > BRUTEFORCE_CAP {
        return Err(Error::cap("brute-force partition", n as u128, BRUTEFORCE_CAP));
    }
    if n == 0 {
        return CliquePartition::new(g, vec![]);
    }
    let mut rgs = vec![0usize; n];
    let mut best: Option<Vec<usize>> = None;
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        if best.as_ref().is_none_or(|b| blocks < b.iter().max().unwrap() + 1) {
            let valid = (0..n).all(|u| (u + 1..n).all(|v| rgs[u] != rgs[v] || g.has_edge(u, v)));
            if valid {
                best = Some(rgs.clone());
            }
        }
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                let labels = best.expect("singletons are always valid");
                let m = labels.iter().max().unwrap() + 1;
                let blocks = (0..m)
                    .map(|b| (0..n).filter(|&v| labels[v] == b).collect())
                    .collect();
                return CliquePartition::new(g, blocks);
            }
            let prefix_max = rgs[..i].iter().max().copied().unwrap();
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|r| *r = 0);
                break;
            }
            i -= 1;
        }
    }
}

/// Turns a clique cover into a partition by removing from each clique the
/// vertices already claimed by earlier ones.
pub fn cover_to_partition(g: &Graph, cover: &[Vec<usize>]) -> Result<CliquePartition> {
    let n = g.len();
    let mut claimed = VertexSet::empty(n);
    let mut blocks = Vec::new();
    for (i, member) in cover.iter().enumerate() {
        if let Some(&v) = member.iter().find(|&&v| v >= n) {
            return Err(Error::Invalid(format!("cover member {i}: vertex {v} outside 0..{n}")));
        }
        let set = VertexSet::from_indices(n, member.iter().copied());
        if !g.is_clique(&set) {
            return Err(Error::Invalid(format!("cover member {i} is not a clique")));
        }
        let mut fresh = set;
        fresh.difference_with(&claimed);
        claimed.union_with(&fresh);
        if !fresh.is_empty() {
            blocks.push(fresh.to_vec());
        }
    }
    if claimed.len() != n {
        return Err(Error::Invalid(format!(
            "cover reaches {} of {n} vertices",
            claimed.len()
        )));
    }
    CliquePartition::new(g, blocks)
}

/// Size of a largest clique.
pub fn clique_number(g: &Graph) -> Result<usize> {
    check_cap(g, EXACT_CAP, "")?;
    Ok(max_clique(g).len())
}

/// Size of a largest independent set.
pub fn independence_number(g: &Graph) -> Result<usize> {
    clique_number(&g.complement())
}

/// Chromatic number by incremental k-colorability search in index order.
///
/// Deliberately independent of the DSATUR solver so the two can check
/// each other through `γ(G) = χ(Ḡ)`.
pub fn chromatic_number(g: &Graph) -> Result<usize> {
    check_cap(g, EXACT_CAP, "")?;
    let n = g.len();
    if n == 0 {
        return Ok(0);
    }
    let mut colors = vec![usize::MAX; n];
    let mut k = 1;
    loop {
        if colorable(g, k, 0, 0, &mut colors) {
            return Ok(k);
        }
        k += 1;
    }
}

fn colorable(g: &Graph, k: usize, v: usize, used: usize, colors: &mut [usize]) -> bool {
    if v == colors.len() {
        return true;
    }
    for c in 0..k.min(used + 1) {
        if g.neighbors(v).iter().all(|u| colors[u] != c) {
            colors[v] = c;
            if colorable(g, k, v + 1, used.max(c + 1), colors) {
                return true;
            }
            colors[v] = usize::MAX;
        }
    }
    false
}

/// Branch and bound max clique with a greedy-coloring bound.
fn max_clique(g: &Graph) -> Vec<usize> {
    fn expand(g: &Graph, current: &mut Vec<usize>, cand: VertexSet, best: &mut Vec<usize>) {
        if cand.is_empty() {
            if current.len() > best.len() {
                *best = current.clone();
            }
            return;
        }
        // greedy coloring of the candidates bounds the clique they can add
        let order: Vec<usize> = cand.to_vec();
        let mut color_of = Vec::with_capacity(order.len());
        let mut classes: Vec<VertexSet> = Vec::new();
        for &v in &order {
            let c = match classes.iter().position(|cl| !cl.intersects(g.neighbors(v))) {
                Some(c) => c,
                None => {
                    classes.push(VertexSet::empty(g.len()));
                    classes.len() - 1
                }
            };
            classes[c].insert(v);
            color_of.push(c + 1);
        }
        let mut idx: Vec<usize> = (0..order.len()).collect();
        idx.sort_by_key(|&i| (color_of[i], order[i]));
        let mut cand = cand;
        for &i in idx.iter().rev() {
            if current.len() + color_of[i] <= best.len() {
                return;
            }
            let v = order[i];
            let mut next = cand.clone();
            next.intersect_with(g.neighbors(v));
            current.push(v);
            expand(g, current, next, best);
            current.pop();
            cand.remove(v);
        }
    }
    let mut best = Vec::new();
    expand(g, &mut Vec::new(), VertexSet::full(g.len()), &mut best);
    best
}

/// Optimal coloring of `h`, returned as color classes.
fn dsatur_branch_and_bound(h: &Graph) -> Vec<VertexSet> {
    let n = h.len();
    if n == 0 {
        return Vec::new();
    }
    let lower = max_clique(h).len();
    let mut search = Search {
        h,
        lower,
        best: greedy_dsatur(h),
        classes: Vec::new(),
        colored: VertexSet::empty(n),
    };
    if search.best.len() > lower {
        search.branch();
    }
    search.best
}

struct Search<'a> {
    h: &'a Graph,
    lower: usize,
    best: Vec<VertexSet>,
    classes: Vec<VertexSet>,
    colored: VertexSet,
}

impl Search<'_> {
    /// Uncolored vertex with most distinct neighbor colors, lowest index on ties.
    fn pick(&self) -> Option<usize> {
        let mut choice: Option<(usize, usize)> = None;
        for v in 0..self.h.len() {
            if self.colored.contains(v) {
                continue;
            }
            let sat = self
                .classes
                .iter()
                .filter(|c| c.intersects(self.h.neighbors(v)))
                .count();
            if choice.is_none_or(|(_, s)| sat > s) {
                choice = Some((v, sat));
            }
        }
        choice.map(|(v, _)| v)
    }

    fn branch(&mut self) {
        let Some(v) = self.pick() else {
            if self.classes.len() < self.best.len() {
                self.best = self.classes.clone();
            }
            return;
        };
        for c in 0..self.classes.len() {
            if self.classes[c].intersects(self.h.neighbors(v)) {
                continue;
            }
            self.classes[c].insert(v);
            self.colored.insert(v);
            self.branch();
            self.colored.remove(v);
            self.classes[c].remove(v);
            if self.best.len() == self.lower {
                return;
            }
        }
        if self.classes.len() + 1 < self.best.len() {
            self.classes.push(VertexSet::from_indices(self.h.len(), [v]));
            self.colored.insert(v);
            self.branch();
            self.colored.remove(v);
            self.classes.pop();
        }
    }
}

/// Plain DSATUR coloring; the initial upper bound.
fn greedy_dsatur(h: &Graph) -> Vec<VertexSet> {
    let n = h.len();
    let mut classes: Vec<VertexSet> = Vec::new();
    let mut colored = VertexSet::empty(n);
    for _ in 0..n {
        let mut choice: Option<(usize, usize, usize)> = None;
        for v in (0..n).filter(|&v| !colored.contains(v)) {
            let sat = classes.iter().filter(|c| c.intersects(h.neighbors(v))).count();
            let mut open = h.neighbors(v).clone();
            open.difference_with(&colored);
            let deg = open.len();
            if choice.is_none_or(|(_, s, d)| (sat, deg) > (s, d)) {
                choice = Some((v, sat, deg));
            }
        }
        let (v, _, _) = choice.expect("an uncolored vertex remains");
        match classes.iter_mut().find(|c| !c.intersects(h.neighbors(v))) {
            Some(c) => c.insert(v),
            None => classes.push(VertexSet::from_indices(n, [v])),
        }
        colored.insert(v);
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4_graph() -> Graph {
        Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn cycle4_partition() {
        let p = clique_partition_exact(&cycle4_graph()).unwrap();
        assert_eq!(p.size(), 2);
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(clique_partition_bruteforce(&cycle4_graph()).unwrap().size(), 2);
    }

    #[test]
    fn extremes() {
        for n in 1..6 {
            assert_eq!(clique_partition_exact(&Graph::empty(n)).unwrap().size(), n);
            assert_eq!(clique_partition_exact(&Graph::complete(n)).unwrap().size(), 1);
            assert_eq!(clique_partition_greedy(&Graph::empty(n)).size(), n);
            assert_eq!(clique_partition_greedy(&Graph::complete(n)).size(), 1);
        }
        assert_eq!(clique_partition_exact(&Graph::empty(0)).unwrap().size(), 0);
    }

    #[test]
    fn bruteforce_small_cases() {
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(clique_partition_bruteforce(&path).unwrap().size(), 2);
        let mut k4_minus = Graph::complete(4);
        k4_minus = Graph::from_edges(4, k4_minus.edges().filter(|&e| e != (0, 3))).unwrap();
        assert_eq!(clique_partition_bruteforce(&k4_minus).unwrap().size(), 2);
        assert!(clique_partition_bruteforce(&Graph::empty(11)).is_err());
    }

    #[test]
    fn exact_cap_suggests_greedy() {
        let err = clique_partition_exact(&Graph::empty(65)).unwrap_err();
        assert!(err.to_string().contains("greedy"));
    }

    #[test]
    fn cover_conversion() {
        let k3 = Graph::complete(3);
        let p = cover_to_partition(&k3, &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
        let p = cover_to_partition(&Graph::complete(4), &vec![vec![0, 1, 2, 3]; 4]).unwrap();
        assert_eq!(p.size(), 1);
        let g = cycle4_graph();
        let p = cover_to_partition(&g, &[vec![2, 3], vec![0, 1]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3]]);
        assert!(cover_to_partition(&g, &[vec![0, 2], vec![1, 3]]).is_err());
        assert!(cover_to_partition(&g, &[vec![0, 1]]).is_err());
    }

    #[test]
    fn numbers() {
        for n in 1..6 {
            let k = Graph::complete(n);
            assert_eq!(clique_number(&k).unwrap(), n);
            assert_eq!(independence_number(&k).unwrap(), 1);
            assert_eq!(chromatic_number(&k).unwrap(), n);
        }
        let g = cycle4_graph();
        assert_eq!(independence_number(&g).unwrap(), 2);
        let c5 = cycle(5);
        assert_eq!(clique_number(&c5).unwrap(), 2);
        assert_eq!(independence_number(&c5).unwrap(), 2);
        assert_eq!(chromatic_number(&c5).unwrap(), 3);
        assert_eq!(clique_partition_exact(&c5).unwrap().size(), 3);
    }

    #[test]
    fn partition_validation() {
        let g = cycle4_graph();
        assert!(CliquePartition::new(&g, vec![vec![0, 2], vec![1, 3]]).is_err());
        assert!(CliquePartition::new(&g, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(CliquePartition::new(&g, vec![vec![0, 1]]).is_err());
        let p = CliquePartition::new(&g, vec![vec![3, 2], vec![1, 0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(p.block_of(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn exact_handles_structured_64_vertex_graph() {
        // 4 groups of 16; groups {0,1} and {2,3} fully joined, nothing else
        let n = 64;
        let group = |v: usize| v / 16;
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| {
            let (a, b) = (group(u), group(v));
            (a.min(b), a.max(b)) == (0, 1) || (a.min(b), a.max(b)) == (2, 3)
        });
        let g = Graph::from_edges(n, edges).unwrap();
        assert_eq!(clique_partition_exact(&g).unwrap().size(), 32);
    }
}
