use std::collections::VecDeque;

use super::CsrMatrix;

/// Reverse Cuthill–McKee ordering of the symmetrized pattern of `a`.
///
/// Returns `perm` with `perm[new] = old`. Each connected component starts
/// from a pseudo-peripheral vertex found by repeated BFS.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, &degree, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (level, last)
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut current = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let (level, _) = bfs_levels(adj, current);
        let depth = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if depth <= ecc && current != seed {
            break;
        }
        ecc = depth;
        // lowest-degree vertex in the last level
        let candidate = (0..adj.len())
            .filter(|&v| level[v] == depth)
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(current);
        if candidate == current {
            break;
        }
        current = candidate;
    }
    current
}

/// Inverse of a permutation given as `perm[new] = old`.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Half-bandwidth of `a` under the ordering `perm` (perm[new] = old).
pub fn bandwidth(a: &CsrMatrix, perm: &[usize]) -> usize {
    let inv = invert(perm);
    let mut bw = 0;
    for i in 0..a.nrows() {
        for &j in a.row(i).0 {
            bw = bw.max(inv[i].abs_diff(inv[j]));
        }
    }
    bw
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rcm_reduces_bandwidth_of_shuffled_path() {
        // Path graph 0-1-...-9 with a scrambled labelling.
        let labels = [3, 7, 0, 9, 5, 1, 8, 2, 6, 4];
        let mut trip = Vec::new();
        for k in 0..10 {
            trip.push((labels[k], labels[k], 2.0));
            if k + 1 < 10 {
                trip.push((labels[k], labels[k + 1], -1.0));
                trip.push((labels[k + 1], labels[k], -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(10, 10, &trip);
        let identity: Vec<usize> = (0..10).collect();
        let perm = reverse_cuthill_mckee(&a);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, identity);
        assert_eq!(bandwidth(&a, &perm), 1);
        assert!(bandwidth(&a, &identity) > 1);
    }
}
