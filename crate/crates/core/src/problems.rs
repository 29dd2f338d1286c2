//! Decision problems: cost oracles plus LP-representable epigraphs.
//!
//! Decisions are plain `&[f64]` slices. The portfolio decision is `(z, beta)`
//! with the CVaR epigraph level appended as the last coordinate; the other
//! problems use `z` directly. Every epigraph LP places the decision block in
//! the first `decision_dim` variables.

use crate::error::Error;
use crate::linalg::Mat;
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowSense};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Scenario weights below this threshold are dropped before building LPs.
pub const WEIGHT_DROP_TOL: f64 = 1e-12;

/// Mean-CVaR portfolio allocation: cost
/// `beta + max(-z'y - beta, 0)/epsilon - lambda z'y` over the simplex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PortfolioProblem {
    pub lambda: f64,
    pub epsilon: f64,
    pub d_y: usize,
}

impl PortfolioProblem {
    /// CVaR at level 15% with no mean-return trade-off.
    pub fn benchmark() -> Self {
        PortfolioProblem { lambda: 0.0, epsilon: 0.15, d_y: 12 }
    }
}

/// Two-stage shipment planning: first-stage warehouse stock at `p1` per
/// unit, recourse shipping at `ship_cost[i][j]` and last-minute production
/// at `p2 > p1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShipmentProblem {
    pub d_z: usize,
    pub d_y: usize,
    pub p1: f64,
    pub p2: f64,
    /// `d_z x d_y` per-unit shipping costs.
    pub ship_cost: Mat,
}

impl ShipmentProblem {
    /// The 4-warehouse / 12-location network: locations evenly spaced on the
    /// unit circle, warehouses on the circle of radius 0.85, shipping at
    /// 10 per unit distance, production at 5 (advance) and 100 (last minute).
    pub fn benchmark() -> Self {
        let (d_z, d_y) = (4, 12);
        let mut c = Mat::zeros(d_z, d_y);
        for i in 0..d_z {
            let wa = 2.0 * std::f64::consts::PI * i as f64 / d_z as f64;
            let (wx, wy) = (0.85 * wa.cos(), 0.85 * wa.sin());
            for j in 0..d_y {
                let la = 2.0 * std::f64::consts::PI * j as f64 / d_y as f64;
                let (lx, ly) = (la.cos(), la.sin());
                c[(i, j)] = 10.0 * ((wx - lx).powi(2) + (wy - ly).powi(2)).sqrt();
            }
        }
        ShipmentProblem { d_z, d_y, p1: 5.0, p2: 100.0, ship_cost: c }
    }

    /// Builds the second-stage LP for stock `z` and demand `y`.
    /// Variables: `s_ij` (row-major) then `t_i`.
    fn recourse_lp(&self, z: &[f64], y: &[f64]) -> LinearProgram {
        let (dz, dy) = (self.d_z, self.d_y);
        let mut lp = LinearProgram::new(dz * dy + dz);
        for i in 0..dz {
            for j in 0..dy {
                lp.objective[i * dy + j] = self.ship_cost[(i, j)];
            }
            lp.objective[dz * dy + i] = self.p2;
        }
        for j in 0..dy {
            let cols: Vec<(usize, f64)> = (0..dz).map(|i| (i * dy + j, 1.0)).collect();
            lp.add_row(RowSense::Ge, y[j], &cols);
        }
        for i in 0..dz {
            let mut cols: Vec<(usize, f64)> = (0..dy).map(|j| (i * dy + j, 1.0)).collect();
            cols.push((dz * dy + i, -1.0));
            lp.add_row(RowSense::Le, z[i], &cols);
        }
        lp
    }

    /// Second-stage optimal value and its sensitivity to the stock vector
    /// (`d Q / d z_i <= 0`), used for cut generation and subgradients.
    ///
    /// Solved as a min-cost flow on the tiny warehouse/location network
    /// (orders of magnitude faster than the equivalent LP, which remains the
    /// reference in tests). Negative stock is meaningful under the synthetic
    /// ERM extension: it forces last-minute production at `p2` per unit.
    pub fn recourse_value_and_gradient(&self, z: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
        if z.len() != self.d_z || y.len() != self.d_y {
            return Err(Error::DimensionMismatch("recourse dimensions".into()));
        }
        if y.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidArgument("negative demand".into()));
        }
        let mut base = 0.0;
        for &zi in z {
            if zi < 0.0 {
                base += self.p2 * (-zi);
            }
        }
        let zplus: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
        let (flow_cost, potentials) = recourse_flow(self, &zplus, y)?;
        let grad = (0..self.d_z)
            .map(|i| if z[i] < 0.0 { -self.p2 } else { -potentials[i] })
            .collect();
        Ok((base + flow_cost, grad))
    }

    /// Reference LP route for the second stage; used by tests to certify the
    /// flow solver.
    pub fn recourse_value_lp(&self, z: &[f64], y: &[f64]) -> Result<f64> {
        let lp = self.recourse_lp(z, y);
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Numerical("shipment recourse not optimal".into()));
        }
        Ok(sol.objective)
    }
}

/// Reusable buffers for the second-stage min-cost flow. Arc pairs live at
/// `(2k, 2k+1)` so `aid ^ 1` is the reverse arc.
#[derive(Default)]
struct FlowWorkspace {
    arc_to: Vec<usize>,
    arc_cap: Vec<f64>,
    arc_cost: Vec<f64>,
    adj: Vec<Vec<usize>>,
    pot: Vec<f64>,
    dist: Vec<f64>,
    prev: Vec<usize>,
    done: Vec<bool>,
    built_for: (usize, usize),
}

thread_local! {
    static FLOW_WS: std::cell::RefCell<FlowWorkspace> =
        std::cell::RefCell::new(FlowWorkspace::default());
}

impl FlowWorkspace {
    /// Rebuilds the fixed topology when the network shape changes; otherwise
    /// only refreshes costs and capacities.
    fn prepare(&mut self, p: &ShipmentProblem, z: &[f64], y: &[f64]) {
        let (dz, dy) = (p.d_z, p.d_y);
        let n_nodes = 2 + dz + dy;
        if self.built_for != (dz, dy) {
            self.built_for = (dz, dy);
            let n_arcs = 2 * (2 * dz + dz * dy + dy);
            self.arc_to = vec![0; n_arcs];
            self.arc_cap = vec![0.0; n_arcs];
            self.arc_cost = vec![0.0; n_arcs];
            self.adj = vec![Vec::new(); n_nodes];
            self.pot = vec![0.0; n_nodes];
            self.dist = vec![0.0; n_nodes];
            self.prev = vec![usize::MAX; n_nodes];
            self.done = vec![false; n_nodes];
            let mut aid = 0;
            let mut add = |ws_to: &mut Vec<usize>, adj: &mut Vec<Vec<usize>>, u: usize, v: usize| {
                ws_to[aid] = v;
                ws_to[aid + 1] = u;
                adj[u].push(aid);
                adj[v].push(aid + 1);
                aid += 2;
            };
            let (s, t) = (0usize, n_nodes - 1);
            for i in 0..dz {
                add(&mut self.arc_to, &mut self.adj, s, 1 + i); // stock
                add(&mut self.arc_to, &mut self.adj, s, 1 + i); // production
            }
            for i in 0..dz {
                for j in 0..dy {
                    add(&mut self.arc_to, &mut self.adj, 1 + i, 1 + dz + j);
                }
            }
            for j in 0..dy {
                add(&mut self.arc_to, &mut self.adj, 1 + dz + j, t);
            }
        }
        let mut aid = 0;
        let mut set = |caps: &mut Vec<f64>, costs: &mut Vec<f64>, cap: f64, cost: f64| {
            caps[aid] = cap;
            caps[aid + 1] = 0.0;
            costs[aid] = cost;
            costs[aid + 1] = -cost;
            aid += 2;
        };
        for i in 0..dz {
            set(&mut self.arc_cap, &mut self.arc_cost, z[i], 0.0);
            set(&mut self.arc_cap, &mut self.arc_cost, f64::INFINITY, p.p2);
        }
        for i in 0..dz {
            for j in 0..dy {
                set(&mut self.arc_cap, &mut self.arc_cost, f64::INFINITY, p.ship_cost[(i, j)]);
            }
        }
        for j in 0..dy {
            set(&mut self.arc_cap, &mut self.arc_cost, y[j], 0.0);
        }
        self.pot.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Successive-shortest-path min-cost flow for the second stage.
///
/// Nodes: source, one per warehouse, one per location, sink. Each warehouse
/// has a zero-cost stock arc capped at `z_i` and an uncapped last-minute
/// production arc at cost `p2`; shipping arcs carry `c_ij`; location-sink
/// arcs are capped at the demands. Returns the minimum cost of serving all
/// demand and the final source distances at the warehouse nodes, which are
/// exactly the capacity shadow prices.
fn recourse_flow(p: &ShipmentProblem, z: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    FLOW_WS.with(|cell| {
        let mut ws = cell.borrow_mut();
        ws.prepare(p, z, y);
        let (dz, dy) = (p.d_z, p.d_y);
        let n_nodes = 2 + dz + dy;
        let (s, t) = (0usize, n_nodes - 1);
        let total: f64 = y.iter().sum();
        let scale = 1.0 + total + z.iter().fold(0.0f64, |a, b| a.max(*b));
        // The flow tolerance must dominate the sum of per-arc clamp
        // tolerances, or clamped dribble across many arcs could strand
        // "unserved" demand.
        let cap_tol = 1e-12 * scale;
        let flow_tol = 1e-9 * scale;

        let ws = &mut *ws;
        let mut pushed = 0.0;
        let mut cost_acc = 0.0;
        let mut guard = 0usize;
        loop {
            // Dense Dijkstra over the (clamped) reduced costs; skipping
            // finalized labels keeps the predecessor structure a tree.
            // Augmentation rounds stop once the sink is finalized; the
            // closing round (flow complete) runs in full so the warehouse
            // potentials are exact shadow prices.
            let closing = pushed >= total - flow_tol;
            for v in 0..n_nodes {
                ws.dist[v] = f64::INFINITY;
                ws.prev[v] = usize::MAX;
                ws.done[v] = false;
            }
            ws.dist[s] = 0.0;
            for _ in 0..n_nodes {
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for v in 0..n_nodes {
                    if !ws.done[v] && ws.dist[v] < best_d {
                        best = v;
                        best_d = ws.dist[v];
                    }
                }
                if best == usize::MAX {
                    break;
                }
                ws.done[best] = true;
                if best == t && !closing {
                    break;
                }
                for &aid in &ws.adj[best] {
                    let to = ws.arc_to[aid];
                    if ws.done[to] || ws.arc_cap[aid] <= cap_tol {
                        continue;
                    }
                    let rc = (ws.arc_cost[aid] + ws.pot[best] - ws.pot[to]).max(0.0);
                    let nd = ws.dist[best] + rc;
                    if nd < ws.dist[to] {
                        ws.dist[to] = nd;
                        ws.prev[to] = aid;
                    }
                }
            }
            // Capping unfinished labels at the sink distance preserves
            // nonnegative reduced costs for the next round.
            let cap_d = if ws.dist[t].is_finite() { ws.dist[t] } else { f64::INFINITY };
            for v in 0..n_nodes {
                let d = ws.dist[v].min(cap_d);
                if d.is_finite() {
                    ws.pot[v] += d;
                }
            }
            if closing {
                break;
            }
            if !ws.dist[t].is_finite() {
                return Err(Error::Numerical("shipment demand unserved".into()));
            }
            let mut b = total - pushed;
            let mut v = t;
            while v != s {
                let aid = ws.prev[v];
                b = b.min(ws.arc_cap[aid]);
                v = ws.arc_to[aid ^ 1];
            }
            let mut v = t;
            while v != s {
                let aid = ws.prev[v];
                ws.arc_cap[aid] -= b;
                if ws.arc_cap[aid] < cap_tol {
                    ws.arc_cap[aid] = 0.0;
                }
                ws.arc_cap[aid ^ 1] += b;
                v = ws.arc_to[aid ^ 1];
            }
            cost_acc += b * ws.pot[t];
            pushed += b;
            guard += 1;
            if guard > 4 * ws.arc_to.len() {
                return Err(Error::Numerical("min-cost flow failed to terminate".into()));
            }
        }
        Ok((cost_acc, (0..dz).map(|i| ws.pot[1 + i]).collect()))
    })
}

/// Capacitated multi-item newsvendor: maximize expected sales
/// `sum_j min(y_j, z_j)` under a total-capacity budget; cost is the negative.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacitatedNewsvendorProblem {
    pub d: usize,
    pub capacity: f64,
}

/// Scalar newsvendor cost at service level `tau`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewsvendorSpec {
    pub tau: f64,
}

/// The decision problems understood by the solver layer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum Problem {
    Portfolio(PortfolioProblem),
    Shipment(ShipmentProblem),
    CapNewsvendor(CapacitatedNewsvendorProblem),
    Newsvendor(NewsvendorSpec),
}

impl Problem {
    /// CLI name of the problem.
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Portfolio(_) => "portfolio",
            Problem::Shipment(_) => "shipment",
            Problem::CapNewsvendor(_) => "cap-newsvendor",
            Problem::Newsvendor(_) => "newsvendor",
        }
    }

    /// Outcome dimension expected by `cost`.
    pub fn outcome_dim(&self) -> usize {
        match self {
            Problem::Portfolio(p) => p.d_y,
            Problem::Shipment(p) => p.d_y,
            Problem::CapNewsvendor(p) => p.d,
            Problem::Newsvendor(_) => 1,
        }
    }

    /// Decision dimension (portfolio includes the CVaR level beta).
    pub fn decision_dim(&self) -> usize {
        match self {
            Problem::Portfolio(p) => p.d_y + 1,
            Problem::Shipment(p) => p.d_z,
            Problem::CapNewsvendor(p) => p.d,
            Problem::Newsvendor(_) => 1,
        }
    }

    /// Realized cost of decision `z` under outcome `y`.
    pub fn cost(&self, z: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dims(z, y)?;
        match self {
            Problem::Portfolio(p) => {
                let ret = crate::linalg::dot(&z[..p.d_y], y);
                let beta = z[p.d_y];
                Ok(beta + (-ret - beta).max(0.0) / p.epsilon - p.lambda * ret)
            }
            Problem::Shipment(p) => {
                let (q, _) = p.recourse_value_and_gradient(z, y)?;
                Ok(p.p1 * z.iter().sum::<f64>() + q)
            }
            Problem::CapNewsvendor(_) => {
                Ok(-z.iter().zip(y).map(|(zi, yi)| zi.min(*yi)).sum::<f64>())
            }
            Problem::Newsvendor(p) => {
                let (z, y) = (z[0], y[0]);
                Ok(((1.0 - p.tau) * (z - y)).max(p.tau * (y - z)))
            }
        }
    }

    fn check_dims(&self, z: &[f64], y: &[f64]) -> Result<()> {
        if z.len() != self.decision_dim() || y.len() != self.outcome_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}: decision {} (want {}), outcome {} (want {})",
                self.name(),
                z.len(),
                self.decision_dim(),
                y.len(),
                self.outcome_dim()
            )));
        }
        Ok(())
    }

    /// Builds the weighted-scenario epigraph LP
    /// `min_z sum_i w_i c(z; y^i)`. The decision block occupies the first
    /// `decision_dim` variables of the program.
    ///
    /// Weights below [`WEIGHT_DROP_TOL`] are dropped; negative weights are
    /// rejected (the solver layer handles those via branch and bound).
    pub fn lp_epigraph(&self, scenarios: &[(f64, &[f64])]) -> Result<LinearProgram> {
        if scenarios.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::NegativeWeightEpigraph);
        }
        let kept: Vec<(f64, &[f64])> = scenarios
            .iter()
            .filter(|(w, _)| *w >= WEIGHT_DROP_TOL)
            .map(|(w, y)| (*w, *y))
            .collect();
        if kept.is_empty() {
            return Err(Error::InvalidArgument("no scenarios with positive weight".into()));
        }
        for (_, y) in &kept {
            if y.len() != self.outcome_dim() {
                return Err(Error::DimensionMismatch("scenario outcome dimension".into()));
            }
        }
        let k = kept.len();
        Ok(match self {
            Problem::Portfolio(p) => {
                // Vars: z (d_y), beta, u_i (one per scenario).
                let d = p.d_y;
                let mut lp = LinearProgram::new(d + 1 + k);
                lp.set_bounds(d, f64::NEG_INFINITY, f64::INFINITY);
                let mut ybar = vec![0.0; d];
                for (w, y) in &kept {
                    for j in 0..d {
                        ybar[j] += w * y[j];
                    }
                }
                for j in 0..d {
                    lp.objective[j] = -p.lambda * ybar[j];
                }
                lp.objective[d] = 1.0;
                for (i, (w, y)) in kept.iter().enumerate() {
                    lp.objective[d + 1 + i] = w / p.epsilon;
                    // z'y + beta + u_i >= 0.
                    let mut cols: Vec<(usize, f64)> =
                        (0..d).map(|j| (j, y[j])).collect();
                    cols.push((d, 1.0));
                    cols.push((d + 1 + i, 1.0));
                    lp.add_row(RowSense::Ge, 0.0, &cols);
                }
                let simplex: Vec<(usize, f64)> = (0..d).map(|j| (j, 1.0)).collect();
                lp.add_row(RowSense::Eq, 1.0, &simplex);
                lp
            }
            Problem::Shipment(p) => {
                // Vars: z (d_z), then per scenario s^k (d_z*d_y) and t^k (d_z).
                let (dz, dy) = (p.d_z, p.d_y);
                let block = dz * dy + dz;
                let mut lp = LinearProgram::new(dz + k * block);
                for i in 0..dz {
                    lp.objective[i] = p.p1;
                }
                for (kk, (w, y)) in kept.iter().enumerate() {
                    let base = dz + kk * block;
                    for i in 0..dz {
                        for j in 0..dy {
                            lp.objective[base + i * dy + j] = w * p.ship_cost[(i, j)];
                        }
                        lp.objective[base + dz * dy + i] = w * p.p2;
                    }
                    for j in 0..dy {
                        let cols: Vec<(usize, f64)> =
                            (0..dz).map(|i| (base + i * dy + j, 1.0)).collect();
                        lp.add_row(RowSense::Ge, y[j], &cols);
                    }
                    for i in 0..dz {
                        let mut cols: Vec<(usize, f64)> =
                            (0..dy).map(|j| (base + i * dy + j, 1.0)).collect();
                        cols.push((base + dz * dy + i, -1.0));
                        cols.push((i, -1.0));
                        lp.add_row(RowSense::Le, 0.0, &cols);
                    }
                }
                lp
            }
            Problem::CapNewsvendor(p) => {
                // Vars: z (d), then sales m^k_j with native bounds [0, y^k_j].
                let d = p.d;
                let mut lp = LinearProgram::new(d + k * d);
                for (kk, (w, y)) in kept.iter().enumerate() {
                    let base = d + kk * d;
                    for j in 0..d {
                        lp.objective[base + j] = -w;
                        lp.set_bounds(base + j, 0.0, y[j].max(0.0));
                        // m^k_j <= z_j.
                        lp.add_row(RowSense::Le, 0.0, &[(base + j, 1.0), (j, -1.0)]);
                    }
                }
                let cap: Vec<(usize, f64)> = (0..d).map(|j| (j, 1.0)).collect();
                lp.add_row(RowSense::Le, p.capacity, &cap);
                lp
            }
            Problem::Newsvendor(p) => {
                // Vars: z (free), theta_i.
                let mut lp = LinearProgram::new(1 + k);
                lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
                for (i, (w, y)) in kept.iter().enumerate() {
                    lp.objective[1 + i] = *w;
                    let y = y[0];
                    // theta >= (1-tau)(z - y)  and  theta >= tau (y - z).
                    lp.add_row(
                        RowSense::Ge,
                        -(1.0 - p.tau) * y,
                        &[(1 + i, 1.0), (0, -(1.0 - p.tau))],
                    );
                    lp.add_row(RowSense::Ge, p.tau * y, &[(1 + i, 1.0), (0, p.tau)]);
                }
                lp
            }
        })
    }

    /// Kept scenarios in epigraph order (weights below the drop tolerance
    /// removed), matching the rows produced by [`Problem::lp_epigraph`].
    pub fn kept_scenarios<'a>(&self, scenarios: &[(f64, &'a [f64])]) -> Vec<(f64, &'a [f64])> {
        scenarios.iter().filter(|(w, _)| *w >= WEIGHT_DROP_TOL).map(|(w, y)| (*w, *y)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portfolio_cost_examples() {
        let p = Problem::Portfolio(PortfolioProblem { lambda: 0.0, epsilon: 0.15, d_y: 2 });
        // z'y = -1, beta = 0: cost = 1/0.15.
        let c = p.cost(&[1.0, 0.0, 0.0], &[-1.0, 5.0]).unwrap();
        assert!((c - 1.0 / 0.15).abs() < 1e-12);
        // Max term inactive: beta >= -z'y.
        let p1 = Problem::Portfolio(PortfolioProblem { lambda: 2.0, epsilon: 0.15, d_y: 2 });
        let c = p1.cost(&[0.5, 0.5, 1.0], &[0.2, 0.4]).unwrap();
        assert!((c - (1.0 - 2.0 * 0.3)).abs() < 1e-12);
        let p2 = Problem::Portfolio(PortfolioProblem { lambda: 1.0, epsilon: 0.5, d_y: 1 });
        let c = p2.cost(&[1.0, 0.2], &[0.1]).unwrap();
        assert!((c - 0.1).abs() < 1e-12);
    }

    #[test]
    fn shipment_cost_hand_lps() {
        let p = ShipmentProblem {
            d_z: 1,
            d_y: 1,
            p1: 5.0,
            p2: 100.0,
            ship_cost: Mat::from_rows(&[vec![10.0]]),
        };
        let prob = Problem::Shipment(p);
        let c = prob.cost(&[10.0], &[8.0]).unwrap();
        assert!((c - 130.0).abs() < 1e-7, "{c}");
        let c = prob.cost(&[0.0], &[8.0]).unwrap();
        assert!((c - 880.0).abs() < 1e-7, "{c}");
        // No demand: only first-stage cost.
        let bench = Problem::Shipment(ShipmentProblem::benchmark());
        let z = [1.0, 2.0, 3.0, 4.0];
        let c = bench.cost(&z, &[0.0; 12]).unwrap();
        assert!((c - 5.0 * 10.0).abs() < 1e-7);
    }

    #[test]
    fn capacitated_newsvendor_cost() {
        let p = Problem::CapNewsvendor(CapacitatedNewsvendorProblem { d: 2, capacity: 4.0 });
        assert_eq!(p.cost(&[0.0, 0.0], &[3.0, 9.0]).unwrap(), 0.0);
        assert_eq!(p.cost(&[5.0, 5.0], &[3.0, 9.0]).unwrap(), -8.0);
        assert_eq!(p.cost(&[9.0, 10.0], &[3.0, 9.0]).unwrap(), -12.0);
    }

    #[test]
    fn newsvendor_cost_examples() {
        let p = Problem::Newsvendor(NewsvendorSpec { tau: 0.5 });
        assert_eq!(p.cost(&[2.0], &[2.0]).unwrap(), 0.0);
        assert_eq!(p.cost(&[0.0], &[2.0]).unwrap(), 1.0);
        let p = Problem::Newsvendor(NewsvendorSpec { tau: 0.9 });
        let c = p.cost(&[3.0], &[1.0]).unwrap();
        assert!((c - 0.2).abs() < 1e-12);
    }

    #[test]
    fn benchmark_network_matches_reference_distances() {
        let p = ShipmentProblem::benchmark();
        // Distance matrix printed to five significant figures.
        let dt: [[f64; 4]; 12] = [
            [0.15, 1.3124, 1.85, 1.3124],
            [0.50026, 0.93408, 1.7874, 1.6039],
            [0.93408, 0.50026, 1.6039, 1.7874],
            [1.3124, 0.15, 1.3124, 1.85],
            [1.6039, 0.50026, 0.93408, 1.7874],
            [1.7874, 0.93408, 0.50026, 1.6039],
            [1.85, 1.3124, 0.15, 1.3124],
            [1.7874, 1.6039, 0.50026, 0.93408],
            [1.6039, 1.7874, 0.93408, 0.50026],
            [1.3124, 1.85, 1.3124, 0.15],
            [0.93408, 1.7874, 1.6039, 0.50026],
            [0.50026, 1.6039, 1.7874, 0.93408],
        ];
        for j in 0..12 {
            for i in 0..4 {
                let d = p.ship_cost[(i, j)] / 10.0;
                assert!(
                    (d - dt[j][i]).abs() < 5e-5,
                    "D[{i}][{j}] = {d} vs {}",
                    dt[j][i]
                );
            }
        }
    }

    #[test]
    fn epigraph_negative_weight_rejected() {
        let p = Problem::Newsvendor(NewsvendorSpec { tau: 0.5 });
        let y = [1.0];
        let r = p.lp_epigraph(&[(0.5, &y[..]), (-0.5, &y[..])]);
        assert!(matches!(r, Err(Error::NegativeWeightEpigraph)));
    }

    #[test]
    fn portfolio_single_scenario_epigraph_matches_grid_oracle() {
        // One scenario, lambda = 0: optimal value is -max_j y_j. Cross-check
        // with a grid search over the simplex and the beta line.
        let prob = Problem::Portfolio(PortfolioProblem { lambda: 0.0, epsilon: 0.15, d_y: 3 });
        let y = [0.3, -0.1, 0.2];
        let lp = prob.lp_epigraph(&[(1.0, &y[..])]).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - (-0.3)).abs() < 1e-8, "{}", sol.objective);

        let mut best = f64::INFINITY;
        let steps = 20;
        for a in 0..=steps {
            for b in 0..=steps - a {
                let z = [
                    a as f64 / steps as f64,
                    b as f64 / steps as f64,
                    (steps - a - b) as f64 / steps as f64,
                ];
                for bi in -60..=60 {
                    let beta = bi as f64 * 0.01;
                    let zfull = [z[0], z[1], z[2], beta];
                    best = best.min(prob.cost(&zfull, &y).unwrap());
                }
            }
        }
        assert!((sol.objective - best).abs() < 1e-6, "lp {} grid {best}", sol.objective);
    }

    #[test]
    fn cap_newsvendor_single_scenario_epigraph() {
        let prob = Problem::CapNewsvendor(CapacitatedNewsvendorProblem { d: 3, capacity: 10.0 });
        let y = [2.0, 3.0, 4.0];
        let lp = prob.lp_epigraph(&[(1.0, &y[..])]).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective - (-9.0)).abs() < 1e-8);
    }

    #[test]
    fn shipment_zero_demand_epigraph() {
        let prob = Problem::Shipment(ShipmentProblem::benchmark());
        let zeros = [0.0; 12];
        let scen: Vec<(f64, &[f64])> = vec![(0.5, &zeros[..]), (0.5, &zeros[..])];
        let lp = prob.lp_epigraph(&scen).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.objective.abs() < 1e-8);
        for i in 0..4 {
            assert!(sol.x[i].abs() < 1e-8);
        }
    }

    #[test]
    fn shipment_cost_convex_in_stock() {
        let prob = Problem::Shipment(ShipmentProblem::benchmark());
        let mut rng = crate::rng::rng_from_seed(61);
        use rand::Rng;
        for _ in 0..200 {
            let z1: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..30.0)).collect();
            let z2: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..30.0)).collect();
            let y: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..10.0)).collect();
            let mid: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| 0.5 * (a + b)).collect();
            let c1 = prob.cost(&z1, &y).unwrap();
            let c2 = prob.cost(&z2, &y).unwrap();
            let cm = prob.cost(&mid, &y).unwrap();
            assert!(cm <= 0.5 * (c1 + c2) + 1e-7, "convexity violated");
        }
    }

    #[test]
    fn recourse_flow_matches_lp_reference() {
        let p = ShipmentProblem::benchmark();
        let mut rng = crate::rng::rng_from_seed(71);
        use rand::Rng;
        for trial in 0..400 {
            let z: Vec<f64> = (0..4)
                .map(|_| match rng.gen_range(0..4) {
                    0 => 0.0,
                    1 => -rng.gen_range(0.0..5.0), // synthetic ERM extension
                    _ => rng.gen_range(0.0..25.0),
                })
                .collect();
            let y: Vec<f64> = (0..12)
                .map(|_| match rng.gen_range(0..3) {
                    0 => 0.0,
                    1 => 4.0, // exact ties across locations
                    _ => rng.gen_range(0.0..12.0),
                })
                .collect();
            let (q_flow, grad) = p.recourse_value_and_gradient(&z, &y).unwrap();
            let zp: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
            let base: f64 = z.iter().map(|v| 100.0 * (-v).max(0.0)).sum();
            let q_lp = p.recourse_value_lp(&zp, &y).unwrap() + base;
            let scale = 1.0 + q_lp.abs();
            assert!(
                (q_flow - q_lp).abs() < 1e-7 * scale,
                "trial {trial}: flow {q_flow} vs lp {q_lp} at z={z:?} y={y:?}"
            );
            // Subgradient inequality Q(z') >= Q(z) + g'(z' - z) certifies the
            // shadow prices even when the optimal duals are not unique.
            for _ in 0..4 {
                let z2: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..25.0)).collect();
                let (q2, _) = p.recourse_value_and_gradient(&z2, &y).unwrap();
                let lin: f64 =
                    grad.iter().zip(&z2).zip(&z).map(|((g, a), b)| g * (a - b)).sum();
                assert!(
                    q2 >= q_flow + lin - 1e-7 * scale,
                    "subgradient violated: {q2} < {q_flow} + {lin}"
                );
            }
        }
    }

    #[test]
    fn recourse_gradient_matches_finite_differences() {
        let p = ShipmentProblem::benchmark();
        let z = [3.0, 1.0, 0.5, 2.0];
        let y: Vec<f64> = (0..12).map(|j| (j as f64) * 0.3).collect();
        let (q0, g) = p.recourse_value_and_gradient(&z, &y).unwrap();
        let h = 1e-5;
        for i in 0..4 {
            let mut zp = z;
            zp[i] += h;
            let (qp, _) = p.recourse_value_and_gradient(&zp, &y).unwrap();
            let fd = (qp - q0) / h;
            assert!(
                (fd - g[i]).abs() < 1e-3 * (1.0 + g[i].abs()),
                "i={i}: fd {fd} vs dual {}",
                g[i]
            );
        }
    }
}
