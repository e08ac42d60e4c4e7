//! Bipartite transportation flow: the maximum mass routable from row
//! marginals to column marginals through a restricted set of cells.
//!
//! Edmonds–Karp on the source/rows/columns/sink network. Adjacency is built
//! in a fixed order and BFS scans it in insertion order, so the returned
//! flow is deterministic.

const RESIDUAL_EPS: f64 = 1e-15;

#[derive(Clone)]
struct Edge {
    to: usize,
    residual: f64,
}

/// Maximum flow from `mu` to `nu` supported on `cells`, together with the
/// per-cell flow (aligned with `cells`).
pub(crate) fn max_flow_on_cells(
    mu: &[f64],
    nu: &[f64],
    cells: &[(usize, usize)],
) -> (f64, Vec<f64>) {
    let (m, n) = (mu.len(), nu.len());
    let source = 0;
    let sink = m + n + 1;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n + 2];
    let mut edges: Vec<Edge> = Vec::with_capacity(2 * (m + n + cells.len()));

    let add_edge = |adj: &mut Vec<Vec<usize>>, edges: &mut Vec<Edge>, u: usize, v: usize, cap: f64| -> usize {
        let id = edges.len();
        edges.push(Edge { to: v, residual: cap });
        edges.push(Edge { to: u, residual: 0.0 });
        adj[u].push(id);
        adj[v].push(id + 1);
        id
    };

    for (i, &w) in mu.iter().enumerate() {
        add_edge(&mut adj, &mut edges, source, 1 + i, w);
    }
    for (j, &w) in nu.iter().enumerate() {
        add_edge(&mut adj, &mut edges, 1 + m + j, sink, w);
    }
    let cell_edge: Vec<usize> = cells
        .iter()
        .map(|&(i, j)| add_edge(&mut adj, &mut edges, 1 + i, 1 + m + j, f64::INFINITY))
        .collect();

    let mut total = 0.0;
    let mut parent_edge = vec![usize::MAX; m + n + 2];
    loop {
        parent_edge.fill(usize::MAX);
        parent_edge[source] = usize::MAX - 1;
        let mut queue = std::collections::VecDeque::from([source]);
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in &adj[u] {
                let v = edges[e].to;
                if parent_edge[v] == usize::MAX && edges[e].residual > RESIDUAL_EPS {
                    parent_edge[v] = e;
                    if v == sink {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if parent_edge[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let e = parent_edge[v];
            bottleneck = bottleneck.min(edges[e].residual);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let e = parent_edge[v];
            edges[e].residual -= bottleneck;
            edges[e ^ 1].residual += bottleneck;
            v = edges[e ^ 1].to;
        }
        total += bottleneck;
    }

    let flows = cell_edge.iter().map(|&e| edges[e ^ 1].residual).collect();
    (total, flows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_support_routes_everything() {
        let mu = [0.7, 0.3];
        let nu = [0.5, 0.5];
        let cells = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let (mass, _) = max_flow_on_cells(&mu, &nu, &cells);
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_support_caps_at_min_sums() {
        let mu = [0.7, 0.3];
        let nu = [0.5, 0.5];
        let cells = [(0, 0), (1, 1)];
        let (mass, flows) = max_flow_on_cells(&mu, &nu, &cells);
        assert!((mass - 0.8).abs() < 1e-12);
        assert!((flows[0] - 0.5).abs() < 1e-12);
        assert!((flows[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn empty_support_routes_nothing() {
        let (mass, flows) = max_flow_on_cells(&[1.0], &[1.0], &[]);
        assert_eq!(mass, 0.0);
        assert!(flows.is_empty());
    }

    #[test]
    fn flow_respects_marginals() {
        let mu = [0.25, 0.25, 0.5];
        let nu = [0.4, 0.6];
        let cells = [(0, 0), (1, 1), (2, 0), (2, 1)];
        let (mass, flows) = max_flow_on_cells(&mu, &nu, &cells);
        assert!((mass - 1.0).abs() < 1e-12);
        let mut row = [0.0; 3];
        let mut col = [0.0; 2];
        for (k, &(i, j)) in cells.iter().enumerate() {
            row[i] += flows[k];
            col[j] += flows[k];
        }
        for i in 0..3 {
            assert!(row[i] <= mu[i] + 1e-12);
        }
        for j in 0..2 {
            assert!(col[j] <= nu[j] + 1e-12);
        }
    }
}
