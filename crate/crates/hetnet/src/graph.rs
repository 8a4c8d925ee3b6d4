//! Directed-graph utilities: elementary cycle enumeration (Johnson's
//! algorithm) and minimum-cycle-sum detection for arc-weighted digraphs.
//!
//! Vertices are `0..n`. The stability module maps equilibrium ids and
//! connection ids onto this range.

use thiserror::Error;

#[derive(Debug, Error)]
#[error("cycle enumeration exceeded the cap of {cap} cycles")]
pub struct CapExceeded {
    pub cap: usize,
}

/// All elementary directed cycles, each rotated so the smallest vertex comes
/// first, sorted by (length, sequence). Aborts once more than `cap` cycles
/// have been produced.
pub fn elementary_cycles(
    n: usize,
    arcs: &[(usize, usize)],
    cap: usize,
) -> Result<Vec<Vec<usize>>, CapExceeded> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in arcs {
        adj[u].push(v);
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }

    let mut found: Vec<Vec<usize>> = Vec::new();
    // Johnson 1975: for each start vertex s, search the subgraph induced by
    // vertices >= s, with blocking to keep the delay polynomial.
    for s in 0..n {
        let mut blocked = vec![false; n];
        let mut block_list: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut stack: Vec<usize> = Vec::new();
        circuit(
            s,
            s,
            &adj,
            &mut blocked,
            &mut block_list,
            &mut stack,
            &mut found,
            cap,
        )
        .map_err(|_| CapExceeded { cap })?;
    }
    found.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn circuit(
    v: usize,
    s: usize,
    adj: &[Vec<usize>],
    blocked: &mut [bool],
    block_list: &mut [Vec<usize>],
    stack: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
    cap: usize,
) -> Result<bool, ()> {
    let mut closed = false;
    stack.push(v);
    blocked[v] = true;
    for &w in &adj[v] {
        if w < s {
            continue;
        }
        if w == s {
            if found.len() >= cap {
                return Err(());
            }
            found.push(stack.clone());
            closed = true;
        } else if !blocked[w] && circuit(w, s, adj, blocked, block_list, stack, found, cap)? {
            closed = true;
        }
    }
    if closed {
        unblock(v, blocked, block_list);
    } else {
        for &w in &adj[v] {
            if w >= s && !block_list[w].contains(&v) {
                block_list[w].push(v);
            }
        }
    }
    stack.pop();
    Ok(closed)
}

fn unblock(v: usize, blocked: &mut [bool], block_list: &mut [Vec<usize>]) {
    blocked[v] = false;
    while let Some(w) = block_list[v].pop() {
        if blocked[w] {
            unblock(w, blocked, block_list);
        }
    }
}

/// Outcome of the minimum-cycle-sum computation.
#[derive(Debug, Clone)]
pub enum MinCycle {
    /// The graph has no directed cycle at all.
    Acyclic,
    /// A cycle attaining (or, for unbounded cases, demonstrating) the
    /// minimum arc-weight sum.
    Cycle { sum: f64, vertices: Vec<usize> },
}

/// Finds a directed cycle minimising the sum of arc weights.
///
/// If a negative cycle exists it is returned (the infimum is unbounded; the
/// returned sum is the witness's). Otherwise shortest paths are well defined
/// and the exact minimum cycle sum is computed by Floyd–Warshall.
pub fn min_cycle_sum(n: usize, arcs: &[(usize, usize, f64)]) -> MinCycle {
    if let Some(cycle) = negative_cycle(n, arcs) {
        let sum = cycle_sum(&cycle, arcs);
        return MinCycle::Cycle {
            sum,
            vertices: cycle,
        };
    }

    const INF: f64 = f64::INFINITY;
    let mut dist = vec![vec![INF; n]; n];
    let mut next = vec![vec![usize::MAX; n]; n];
    for &(u, v, w) in arcs {
        if w < dist[u][v] {
            dist[u][v] = w;
            next[u][v] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if dist[i][k] == INF {
                continue;
            }
            for j in 0..n {
                let cand = dist[i][k] + dist[k][j];
                if cand < dist[i][j] {
                    dist[i][j] = cand;
                    next[i][j] = next[i][k];
                }
            }
        }
    }

    let mut best: Option<(f64, usize)> = None;
    for v in 0..n {
        if dist[v][v] < INF {
            match best {
                Some((b, _)) if b <= dist[v][v] => {}
                _ => best = Some((dist[v][v], v)),
            }
        }
    }
    match best {
        None => MinCycle::Acyclic,
        Some((sum, start)) => {
            let mut vertices = vec![start];
            let mut cur = next[start][start];
            while cur != start && vertices.len() <= n {
                vertices.push(cur);
                cur = next[cur][start];
            }
            MinCycle::Cycle { sum, vertices }
        }
    }
}

/// Bellman–Ford negative-cycle detection from a virtual all-zero source.
fn negative_cycle(n: usize, arcs: &[(usize, usize, f64)]) -> Option<Vec<usize>> {
    if n == 0 {
        return None;
    }
    let mut dist = vec![0.0f64; n];
    let mut pred = vec![usize::MAX; n];
    let mut changed_vertex = None;
    for round in 0..n {
        let mut changed = None;
        for &(u, v, w) in arcs {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
                pred[v] = u;
                changed = Some(v);
            }
        }
        changed_vertex = changed;
        if changed.is_none() {
            return None;
        }
        if round == n - 1 {
            break;
        }
    }
    // A relaxation in round n proves a negative cycle; walk predecessors
    // n times to land on it, then read it off.
    let mut v = changed_vertex?;
    for _ in 0..n {
        v = pred[v];
    }
    let start = v;
    let mut cycle = vec![start];
    let mut cur = pred[start];
    while cur != start {
        cycle.push(cur);
        cur = pred[cur];
    }
    cycle.reverse();
    Some(cycle)
}

/// Sum of arc weights along a closed vertex sequence (wrapping).
pub fn cycle_sum(cycle: &[usize], arcs: &[(usize, usize, f64)]) -> f64 {
    let mut total = 0.0;
    for i in 0..cycle.len() {
        let u = cycle[i];
        let v = cycle[(i + 1) % cycle.len()];
        let w = arcs
            .iter()
            .filter(|(a, b, _)| *a == u && *b == v)
            .map(|(_, _, w)| *w)
            .fold(f64::INFINITY, f64::min);
        total += w;
    }
    total
}

/// Rotates a cycle so its smallest vertex comes first.
pub fn canonical_rotation(cycle: &[usize]) -> Vec<usize> {
    if cycle.is_empty() {
        return Vec::new();
    }
    let pivot = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, v)| (**v, usize::MAX))
        .map(|(i, _)| i)
        .unwrap();
    let mut best: Option<Vec<usize>> = None;
    // Ties on the smallest vertex (repeated visits) are broken by the
    // lexicographically least rotation.
    for (i, v) in cycle.iter().enumerate() {
        if v == &cycle[pivot] {
            let rot: Vec<usize> = cycle[i..].iter().chain(&cycle[..i]).copied().collect();
            if best.as_ref().map_or(true, |b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_has_one_cycle() {
        let cycles = elementary_cycles(3, &[(0, 1), (1, 2), (2, 0)], 1000).unwrap();
        assert_eq!(cycles, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn two_cycles_through_shared_vertex() {
        let arcs = [(0, 1), (1, 0), (1, 2), (2, 1)];
        let cycles = elementary_cycles(3, &arcs, 1000).unwrap();
        assert_eq!(cycles, vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn cap_is_enforced() {
        // Complete digraph on 6 vertices has 409 elementary cycles.
        let mut arcs = Vec::new();
        for u in 0..6 {
            for v in 0..6 {
                if u != v {
                    arcs.push((u, v));
                }
            }
        }
        assert!(elementary_cycles(6, &arcs, 10).is_err());
        assert_eq!(elementary_cycles(6, &arcs, 1_000_000).unwrap().len(), 409);
    }

    #[test]
    fn min_cycle_sum_finds_negative_cycle() {
        let arcs = [(0, 1, 1.0), (1, 2, -3.0), (2, 0, 1.0), (2, 3, 1.0)];
        match min_cycle_sum(4, &arcs) {
            MinCycle::Cycle { sum, vertices } => {
                assert!((sum + 1.0).abs() < 1e-12);
                assert_eq!(canonical_rotation(&vertices), vec![0, 1, 2]);
            }
            MinCycle::Acyclic => panic!("cycle expected"),
        }
    }

    #[test]
    fn min_cycle_sum_exact_on_nonnegative() {
        let arcs = [
            (0, 1, 2.0),
            (1, 0, 3.0),
            (1, 2, 1.0),
            (2, 1, 0.5),
            (2, 2, 9.0),
        ];
        match min_cycle_sum(3, &arcs) {
            MinCycle::Cycle { sum, .. } => assert!((sum - 1.5).abs() < 1e-12),
            MinCycle::Acyclic => panic!(),
        }
    }

    #[test]
    fn min_cycle_sum_detects_zero_cycles() {
        let arcs = [(0, 1, 0.0), (1, 0, 0.0)];
        match min_cycle_sum(2, &arcs) {
            MinCycle::Cycle { sum, .. } => assert_eq!(sum, 0.0),
            MinCycle::Acyclic => panic!(),
        }
    }

    #[test]
    fn acyclic_graph_reports_acyclic() {
        let arcs = [(0, 1, -5.0), (1, 2, -5.0)];
        assert!(matches!(min_cycle_sum(3, &arcs), MinCycle::Acyclic));
    }
}
