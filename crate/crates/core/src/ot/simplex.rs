//! Dense transportation simplex.
//!
//! Degeneracy is removed by the classical lexicographic perturbation: every
//! supply gets `+eps` and the last demand `+m eps`, with `eps` carried
//! symbolically as an integer coefficient. Every basis is then
//! non-degenerate, so the ratio test has a unique winner and the method
//! cannot cycle. Entering cells follow Dantzig's rule with ties broken by
//! the smallest (row, column).
//!
//! Forbidden cells (sentinel costs) carry a big-M cost; a solution that
//! still routes mass through one is reported as infeasible.

use crate::error::{Error, Result};
use crate::grid::is_sentinel;

/// Real part plus an integer multiple of the symbolic perturbation.
#[derive(Clone, Copy, Debug)]
struct Lex {
    r: f64,
    e: i64,
}

const TIE: f64 = 1e-13;

impl Lex {
    fn lt(self, o: Lex) -> bool {
        if (self.r - o.r).abs() > TIE {
            self.r < o.r
        } else {
            self.e < o.e
        }
    }
    fn eq(self, o: Lex) -> bool {
        (self.r - o.r).abs() <= TIE && self.e == o.e
    }
    fn sub(self, o: Lex) -> Lex {
        Lex { r: self.r - o.r, e: self.e - o.e }
    }
    fn add(self, o: Lex) -> Lex {
        Lex { r: self.r + o.r, e: self.e + o.e }
    }
}

pub(crate) struct LpSolution {
    pub plan: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub pivots: usize,
}

/// Minimizes sum c_ij x_ij subject to row sums `supply` and column sums
/// `demand`. Potentials satisfy h_j - g_i <= c_ij with equality on the
/// basis and g_0 = 0.
pub(crate) fn solve(cost: &[f64], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Result<LpSolution> {
    assert_eq!(cost.len(), m * n);
    let finite: Vec<f64> = cost.iter().copied().filter(|c| !is_sentinel(*c)).collect();
    if finite.is_empty() {
        return Err(Error::Infeasible);
    }
    let cmax = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cmin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let big_m = cmax + 2.0 * (m + n) as f64 * (cmax - cmin + 1.0);
    let c: Vec<f64> = cost.iter().map(|&v| if is_sentinel(v) { big_m } else { v }).collect();
    let scale = cmax.abs().max(cmin.abs()).max(1.0);
    let opt_eps = 1e-12 * scale;

    // Greedy least-cost start on the perturbed problem.
    let mut rs: Vec<Lex> = supply.iter().map(|&a| Lex { r: a, e: 1 }).collect();
    let mut rd: Vec<Lex> = demand.iter().map(|&b| Lex { r: b, e: 0 }).collect();
    rd[n - 1].e = m as i64;
    let mut order: Vec<usize> = (0..m * n).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<Lex> = Vec::with_capacity(m + n - 1);
    for &cell in &order {
        let (i, j) = (cell / n, cell % n);
        if row_done[i] || col_done[j] {
            continue;
        }
        if rs[i].lt(rd[j]) {
            basis.push((i, j));
            flow.push(rs[i]);
            rd[j] = rd[j].sub(rs[i]);
            rs[i] = Lex { r: 0.0, e: 0 };
            row_done[i] = true;
        } else if rd[j].lt(rs[i]) {
            basis.push((i, j));
            flow.push(rd[j]);
            rs[i] = rs[i].sub(rd[j]);
            rd[j] = Lex { r: 0.0, e: 0 };
            col_done[j] = true;
        } else {
            basis.push((i, j));
            flow.push(rs[i]);
            row_done[i] = true;
            col_done[j] = true;
        }
        if basis.len() == m + n - 1 {
            break;
        }
    }
    if basis.len() != m + n - 1 {
        // Only reachable when marginals are inconsistent.
        return Err(Error::SizeMismatch("marginals do not balance".into()));
    }

    let nodes = m + n;
    let mut g = vec![0.0; m];
    let mut h = vec![0.0; n];
    let mut parent = vec![usize::MAX; nodes];
    let mut parent_cell = vec![usize::MAX; nodes];
    let mut depth = vec![0usize; nodes];
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    let max_pivots = 50 * (m * n + m + n) + 1000;
    let mut pivots = 0usize;

    loop {
        // Potentials from the basis tree rooted at row 0.
        for a in adj.iter_mut() {
            a.clear();
        }
        for (k, &(i, j)) in basis.iter().enumerate() {
            adj[i].push((m + j, k));
            adj[m + j].push((i, k));
        }
        let mut seen = vec![false; nodes];
        let mut stack = vec![0usize];
        seen[0] = true;
        g[0] = 0.0;
        parent[0] = usize::MAX;
        depth[0] = 0;
        while let Some(u) = stack.pop() {
            for &(w, k) in &adj[u] {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                parent[w] = u;
                parent_cell[w] = k;
                depth[w] = depth[u] + 1;
                let (i, j) = basis[k];
                if w >= m {
                    h[j] = c[i * n + j] + g[i];
                } else {
                    g[i] = h[j] - c[i * n + j];
                }
                stack.push(w);
            }
        }
        debug_assert!(seen.iter().all(|s| *s), "basis must span all nodes");

        // Entering cell: most negative reduced cost.
        let mut best = -opt_eps;
        let mut enter = None;
        for i in 0..m {
            let gi = g[i];
            let row = &c[i * n..(i + 1) * n];
            for j in 0..n {
                let r = row[j] - h[j] + gi;
                if r < best {
                    best = r;
                    enter = Some((i, j));
                }
            }
        }
        let Some((ei, ej)) = enter else { break };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::NoConvergence { iterations: pivots, residual: best });
        }

        // Tree path from column ej to row ei.
        let (mut u, mut v) = (m + ej, ei);
        let mut up_u = Vec::new();
        let mut up_v = Vec::new();
        while depth[u] > depth[v] {
            up_u.push(parent_cell[u]);
            u = parent[u];
        }
        while depth[v] > depth[u] {
            up_v.push(parent_cell[v]);
            v = parent[v];
        }
        while u != v {
            up_u.push(parent_cell[u]);
            u = parent[u];
            up_v.push(parent_cell[v]);
            v = parent[v];
        }
        up_v.reverse();
        let path: Vec<usize> = up_u.into_iter().chain(up_v).collect();

        // Cells at even positions lose flow, odd positions gain.
        let mut leave_pos = 0usize;
        let mut theta = flow[path[0]];
        for (pos, &k) in path.iter().enumerate().step_by(2).skip(1) {
            if flow[k].lt(theta) {
                theta = flow[k];
                leave_pos = pos;
            } else if flow[k].eq(theta) {
                // Cannot happen under the perturbation; keep the first.
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            flow[k] = if pos % 2 == 0 { flow[k].sub(theta) } else { flow[k].add(theta) };
        }
        let leave = path[leave_pos];
        basis[leave] = (ei, ej);
        flow[leave] = theta;
    }

    let mut plan = vec![0.0; m * n];
    for (k, &(i, j)) in basis.iter().enumerate() {
        let r = flow[k].r;
        plan[i * n + j] = if r.abs() < 1e-14 { 0.0 } else { r.max(0.0) };
    }
    for (idx, &x) in plan.iter().enumerate() {
        if x > 1e-12 && is_sentinel(cost[idx]) {
            return Err(Error::Infeasible);
        }
    }
    Ok(LpSolution { plan, g, h, pivots })
}
