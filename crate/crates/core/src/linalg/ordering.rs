//! Fill-reducing orderings for symmetric sparsity patterns.

use std::collections::VecDeque;

/// Leaf size below which nested dissection stops splitting.
const LEAF: usize = 48;

/// Nested-dissection elimination order of an undirected graph given as
/// adjacency lists. Separators are taken from the middle level of a BFS
/// rooted at a pseudo-peripheral vertex.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    // membership stamp: vertex v belongs to the current set iff set_id[v] == id
    let mut set_id = vec![0usize; n];
    let mut level = vec![usize::MAX; n];
    let mut next_id = 1usize;

    // explicit work stack: (vertices, emit_after) where emit_after holds a
    // separator to append once both halves are done
    enum Work {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Work::Split((0..n).collect())];
    while let Some(w) = stack.pop() {
        match w {
            Work::Emit(sep) => order.extend(sep),
            Work::Split(set) => {
                if set.len() <= LEAF {
                    order.extend(set);
                    continue;
                }
                let id = next_id;
                next_id += 1;
                for &v in &set {
                    set_id[v] = id;
                }
                let comps = components(adj, &set, &set_id, id, &mut level);
                if comps.len() > 1 {
                    // independent components: no separator needed
                    for c in comps.into_iter().rev() {
                        stack.push(Work::Split(c));
                    }
                    continue;
                }
                let root = pseudo_peripheral(adj, set[0], &set_id, id, &mut level, &set);
                let depth = bfs_levels(adj, root, &set_id, id, &mut level, &set);
                if depth < 3 {
                    order.extend(set);
                    continue;
                }
                let mut counts = vec![0usize; depth];
                for &v in &set {
                    counts[level[v]] += 1;
                }
                let half = set.len() / 2;
                let mut acc = 0;
                let mut mid = depth / 2;
                for (l, c) in counts.iter().enumerate() {
                    acc += c;
                    if acc >= half {
                        mid = l.clamp(1, depth - 2);
                        break;
                    }
                }
                let (mut a, mut b, mut sep) = (Vec::new(), Vec::new(), Vec::new());
                for &v in &set {
                    match level[v].cmp(&mid) {
                        std::cmp::Ordering::Less => a.push(v),
                        std::cmp::Ordering::Greater => b.push(v),
                        std::cmp::Ordering::Equal => sep.push(v),
                    }
                }
                stack.push(Work::Emit(sep));
                stack.push(Work::Split(b));
                stack.push(Work::Split(a));
            }
        }
    }
    order
}

fn components(
    adj: &[Vec<usize>],
    set: &[usize],
    set_id: &[usize],
    id: usize,
    seen: &mut [usize],
) -> Vec<Vec<usize>> {
    for &v in set {
        seen[v] = usize::MAX;
    }
    let mut comps = Vec::new();
    for &s in set {
        if seen[s] != usize::MAX {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = 0;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &w in &adj[v] {
                if set_id[w] == id && seen[w] == usize::MAX {
                    seen[w] = 0;
                    comp.push(w);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

fn bfs_levels(
    adj: &[Vec<usize>],
    root: usize,
    set_id: &[usize],
    id: usize,
    level: &mut [usize],
    set: &[usize],
) -> usize {
    for &v in set {
        level[v] = usize::MAX;
    }
    level[root] = 0;
    let mut q = VecDeque::from([root]);
    let mut depth = 1;
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if set_id[w] == id && level[w] == usize::MAX {
                level[w] = level[v] + 1;
                depth = depth.max(level[w] + 1);
                q.push_back(w);
            }
        }
    }
    depth
}

fn pseudo_peripheral(
    adj: &[Vec<usize>],
    start: usize,
    set_id: &[usize],
    id: usize,
    level: &mut [usize],
    set: &[usize],
) -> usize {
    let mut root = start;
    let mut depth = bfs_levels(adj, root, set_id, id, level, set);
    for _ in 0..4 {
        // farthest vertex of minimum degree
        let far = set
            .iter()
            .copied()
            .filter(|&v| level[v] == depth - 1)
            .min_by_key(|&v| adj[v].len())
            .unwrap_or(root);
        let d = bfs_levels(adj, far, set_id, id, level, set);
        if d <= depth {
            bfs_levels(adj, root, set_id, id, level, set);
            break;
        }
        root = far;
        depth = d;
    }
    root
}
